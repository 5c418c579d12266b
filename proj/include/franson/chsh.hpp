#pragma once

#include <array>
#include <numbers>

#include "json.hpp"

namespace franson::chsh {

/// Interferometer phases for the four CHSH measurement settings.
struct Settings {
  double a = 0.0;
  double a_prime = std::numbers::pi / 2;
  double b = std::numbers::pi / 4;
  double b_prime = 3 * std::numbers::pi / 4;

  /// (phi_A, phi_B) of setting k in the order (a,b), (a,b'), (a',b), (a',b').
  std::pair<double, double> pair(int k) const;
};

/// Coincidence counts of one setting, per detector pair.
struct PairCounts {
  double n11 = 0;  // A1 B1
  double n12 = 0;  // A1 B2
  double n21 = 0;  // A2 B1
  double n22 = 0;  // A2 B2

  double total() const { return n11 + n12 + n21 + n22; }
};

/// The sixteen counts, indexed like Settings::pair.
struct Counts {
  Settings settings;
  std::array<PairCounts, 4> per_setting{};
};

struct Correlation {
  double phi_a = 0;
  double phi_b = 0;
  double e = 0;
  double variance = 0;
};

struct Result {
  Settings settings;
  std::array<Correlation, 4> correlations{};
  double s = 0;
  double sigma_s = 0;
  Counts counts;

  nlohmann::json to_json() const;
};

/// E = (N11 + N22 - N12 - N21) / sum per setting, S = |E1 - E2 + E3 + E4|.
/// Variances assume independent Poisson counts. Throws std::invalid_argument
/// on negative counts or a setting whose counts sum to zero.
Result chsh(const Counts& counts);

/// S for arbitrary settings when E(phi_a, phi_b) = V cos(phi_a - phi_b).
double s_for_visibility(const Settings& settings, double visibility);

/// Expected counts with N11 = N22 = scale (1 + V cos(dphi)), N12 = N21 = scale (1 - V cos(dphi)).
Counts fringe_counts(const Settings& settings, double visibility, double scale);

nlohmann::json to_json(const Counts& counts);
/// Accepts {"settings": {...}, "counts": [[n11, n12, n21, n22] x4]}.
Counts counts_from_json(const nlohmann::json& j);

}  // namespace franson::chsh
