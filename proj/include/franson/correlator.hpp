#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "franson/timetag.hpp"
#include "json.hpp"

namespace franson::correlator {

/// Pair counts of t_y - t_x in bins of width w centred on k w, k = -K..K with
/// K = max_lag / w. Delays round to the nearest bin centre, halves away from zero.
struct Histogram {
  std::uint64_t bin_width_ps = 0;
  std::uint64_t max_lag_ps = 0;
  std::vector<std::int64_t> lags_ps;
  std::vector<std::uint64_t> counts;
  std::uint64_t n_x = 0;
  std::uint64_t n_y = 0;
  std::uint64_t duration_ps = 0;
  bool autocorrelation = false;

  /// lag_ps,count
  std::string to_csv() const;
};

struct Options {
  /// x and y are the same stream: pairs of a tag with itself are skipped.
  bool autocorrelation = false;
  /// Acquisition length; 0 takes the last timestamp of either stream + 1.
  std::uint64_t duration_ps = 0;
  /// Worker threads over chunks of x. Results do not depend on it.
  int jobs = 1;
};

/// Throws std::invalid_argument for unsorted input, bin_width 0 or max_lag
/// not a multiple of bin_width.
Histogram cross_correlate(const std::vector<std::uint64_t>& x, const std::vector<std::uint64_t>& y,
                          std::uint64_t bin_width_ps, std::uint64_t max_lag_ps, const Options& options = {});

struct G2Curve {
  std::uint64_t bin_width_ps = 0;
  std::vector<std::int64_t> lags_ps;
  std::vector<double> g2;
  /// Tags per second on x and y.
  double rate_x = 0;
  double rate_y = 0;
  std::uint64_t duration_ps = 0;

  nlohmann::json to_json() const;
};

/// g2 = counts T / (N_x N_y w). Throws std::domain_error for zero rates or duration.
G2Curve normalize_g2(const Histogram& h);

/// Pairs with |(t_y - t_x) - lag| <= window / 2.
std::uint64_t coincidences_at(const std::vector<std::uint64_t>& x, const std::vector<std::uint64_t>& y,
                              std::int64_t lag_ps, std::uint64_t window_ps);

}  // namespace franson::correlator
