#pragma once

#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace franson::fringe {

struct Point {
  double phi = 0;
  double count = 0;
};

/// N(phi) = n1 [1 + cos(phi - phi_b - offset)] + n2.
struct Fit {
  double n1 = 0;
  double n2 = 0;
  double offset = 0;
  double visibility = 0;
  double sigma_visibility = 0;
  /// Covariance of (n1, n2) or, with a free offset, (n1, n2, offset).
  Eigen::MatrixXd covariance;
  double chi2 = 0;
  int dof = 0;

  double evaluate(double phi, double phi_b) const;
  nlohmann::json to_json() const;
};

struct FitOptions {
  bool free_offset = false;
  /// Weight each point by 1 / max(count, 1) (Poisson); otherwise unit weights
  /// with the covariance scaled by the residual variance.
  bool poisson_weights = true;
};

/// Weighted least squares. Needs at least 5 points covering one period
/// (span >= 2 pi (n - 1) / n); throws std::invalid_argument otherwise and
/// std::domain_error when the normal equations are singular.
Fit fit_fringe(const std::vector<Point>& points, double phi_b, const FitOptions& options = {});

}  // namespace franson::fringe
