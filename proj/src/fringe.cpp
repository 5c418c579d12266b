#include "franson/fringe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace franson::fringe {

double Fit::evaluate(double phi, double phi_b) const { return n1 * (1 + std::cos(phi - phi_b - offset)) + n2; }

nlohmann::json Fit::to_json() const {
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index i = 0; i < covariance.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < covariance.cols(); ++k) row.push_back(covariance(i, k));
    cov.push_back(row);
  }
  return {{"N1", n1},   {"N2", n2},         {"offset", offset}, {"visibility", visibility},
          {"sigma_visibility", sigma_visibility}, {"covariance", cov}, {"chi2", chi2}, {"dof", dof}};
}

Fit fit_fringe(const std::vector<Point>& points, double phi_b, const FitOptions& options) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 5) throw std::invalid_argument("fringe fit needs at least 5 points");
  auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                      [](const Point& x, const Point& y) { return x.phi < y.phi; });
  const double period = 2 * std::numbers::pi;
  if (hi->phi - lo->phi < period * static_cast<double>(n - 1) / static_cast<double>(n) - 1e-9) {
    throw std::invalid_argument("fringe points must span one period");
  }

  const Eigen::Index p = options.free_offset ? 3 : 2;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = points[static_cast<std::size_t>(i)];
    const double d = pt.phi - phi_b;
    if (options.free_offset) {
      x.row(i) << std::cos(d), std::sin(d), 1.0;
    } else {
      x.row(i) << 1 + std::cos(d), 1.0;
    }
    y(i) = pt.count;
    w(i) = options.poisson_weights ? 1.0 / std::max(pt.count, 1.0) : 1.0;
  }
  const Eigen::MatrixXd normal = x.transpose() * w.asDiagonal() * x;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normal);
  const auto& sv = svd.singularValues();
  if (!(sv(p - 1) > 1e-12 * sv(0))) throw std::domain_error("fringe fit is degenerate");
  const Eigen::VectorXd beta = normal.ldlt().solve(x.transpose() * w.asDiagonal() * y);
  Eigen::MatrixXd cov = normal.inverse();

  Fit fit;
  const Eigen::VectorXd resid = y - x * beta;
  fit.chi2 = resid.dot(w.asDiagonal() * resid);
  fit.dof = static_cast<int>(n - p);
  if (!options.poisson_weights && fit.dof > 0) cov *= fit.chi2 / fit.dof;

  if (options.free_offset) {
    const double cc = beta(0), cs = beta(1), c0 = beta(2);
    fit.n1 = std::hypot(cc, cs);
    fit.offset = std::atan2(cs, cc);
    fit.n2 = c0 - fit.n1;
    Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();
    if (fit.n1 > 0) {
      jac.row(0) << cc / fit.n1, cs / fit.n1, 0;
      jac.row(2) << -cs / (fit.n1 * fit.n1), cc / (fit.n1 * fit.n1), 0;
    } else {
      jac.row(0) << 1, 0, 0;
    }
    jac.row(1) << -jac(0, 0), -jac(0, 1), 1;
    fit.covariance = jac * cov * jac.transpose();
  } else {
    fit.n1 = beta(0);
    fit.n2 = beta(1);
    fit.covariance = cov;
  }
  const double total = fit.n1 + fit.n2;
  if (!(total > 0)) throw std::domain_error("fringe fit has non-positive mean");
  fit.visibility = fit.n1 / total;
  Eigen::Vector2d grad(fit.n2 / (total * total), -fit.n1 / (total * total));
  fit.sigma_visibility = std::sqrt(std::max(0.0, grad.dot(fit.covariance.topLeftCorner(2, 2) * grad)));
  return fit;
}

}  // namespace franson::fringe
