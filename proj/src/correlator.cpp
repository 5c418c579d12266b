#include "franson/correlator.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "franson/parallel.hpp"

namespace franson::correlator {
namespace {

constexpr std::size_t kChunk = 1 << 16;

void check_sorted(const std::vector<std::uint64_t>& v, const char* which) {
  if (!std::is_sorted(v.begin(), v.end())) throw std::invalid_argument(std::string(which) + " stream is not sorted");
}

}  // namespace

std::string Histogram::to_csv() const {
  std::ostringstream os;
  os << "lag_ps,count\n";
  for (std::size_t k = 0; k < counts.size(); ++k) os << lags_ps[k] << ',' << counts[k] << '\n';
  return os.str();
}

Histogram cross_correlate(const std::vector<std::uint64_t>& x, const std::vector<std::uint64_t>& y,
                          std::uint64_t bin_width_ps, std::uint64_t max_lag_ps, const Options& options) {
  if (bin_width_ps == 0) throw std::invalid_argument("bin width must be >= 1 ps");
  if (max_lag_ps % bin_width_ps != 0) throw std::invalid_argument("max lag must be a multiple of the bin width");
  check_sorted(x, "x");
  check_sorted(y, "y");
  if (options.autocorrelation && x.size() != y.size()) {
    throw std::invalid_argument("autocorrelation needs the same stream twice");
  }
  const auto w = static_cast<std::int64_t>(bin_width_ps);
  const auto kmax = static_cast<std::int64_t>(max_lag_ps / bin_width_ps);
  const auto nbins = static_cast<std::size_t>(2 * kmax + 1);
  // Largest |dt| that still rounds into bin +-kmax.
  const auto reach = static_cast<std::uint64_t>((2 * kmax * w + w - 1) / 2);

  Histogram h;
  h.bin_width_ps = bin_width_ps;
  h.max_lag_ps = max_lag_ps;
  h.n_x = x.size();
  h.n_y = y.size();
  h.autocorrelation = options.autocorrelation;
  h.duration_ps = options.duration_ps;
  if (h.duration_ps == 0) {
    const std::uint64_t last = std::max(x.empty() ? 0 : x.back(), y.empty() ? 0 : y.back());
    h.duration_ps = (x.empty() && y.empty()) ? 0 : last + 1;
  }
  for (std::int64_t k = -kmax; k <= kmax; ++k) h.lags_ps.push_back(k * w);

  const std::size_t chunks = (x.size() + kChunk - 1) / kChunk;
  std::vector<std::vector<std::uint64_t>> partial(chunks, std::vector<std::uint64_t>(nbins, 0));
  parallel_for(chunks, options.jobs, [&](std::size_t c) {
    auto& counts = partial[c];
    const std::size_t begin = c * kChunk, end = std::min(x.size(), begin + kChunk);
    auto lo = std::lower_bound(y.begin(), y.end(), x[begin] > reach ? x[begin] - reach : 0);
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint64_t xi = x[i];
      const std::uint64_t floor = xi > reach ? xi - reach : 0;
      while (lo != y.end() && *lo < floor) ++lo;
      for (auto it = lo; it != y.end() && *it <= xi + reach; ++it) {
        if (options.autocorrelation && static_cast<std::size_t>(it - y.begin()) == i) continue;
        const std::int64_t d = static_cast<std::int64_t>(*it) - static_cast<std::int64_t>(xi);
        const std::int64_t mag = (2 * (d < 0 ? -d : d) + w) / (2 * w);
        if (mag > kmax) continue;
        ++counts[static_cast<std::size_t>((d < 0 ? -mag : mag) + kmax)];
      }
    }
  });
  h.counts.assign(nbins, 0);
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < nbins; ++k) h.counts[k] += p[k];
  }
  return h;
}

nlohmann::json G2Curve::to_json() const {
  return {{"bin_width_ps", bin_width_ps},
          {"lags", lags_ps},
          {"g2", g2},
          {"rates", {rate_x, rate_y}},
          {"duration_ps", duration_ps}};
}

G2Curve normalize_g2(const Histogram& h) {
  if (h.duration_ps == 0) throw std::domain_error("cannot normalize a zero-duration histogram");
  if (h.n_x == 0 || h.n_y == 0) throw std::domain_error("cannot normalize with an empty stream");
  G2Curve g;
  g.bin_width_ps = h.bin_width_ps;
  g.lags_ps = h.lags_ps;
  g.duration_ps = h.duration_ps;
  const double t = static_cast<double>(h.duration_ps);
  g.rate_x = static_cast<double>(h.n_x) / (t * 1e-12);
  g.rate_y = static_cast<double>(h.n_y) / (t * 1e-12);
  const double expected =
      static_cast<double>(h.n_x) * static_cast<double>(h.n_y) * static_cast<double>(h.bin_width_ps) / t;
  for (auto c : h.counts) g.g2.push_back(static_cast<double>(c) / expected);
  return g;
}

std::uint64_t coincidences_at(const std::vector<std::uint64_t>& x, const std::vector<std::uint64_t>& y,
                              std::int64_t lag_ps, std::uint64_t window_ps) {
  check_sorted(x, "x");
  check_sorted(y, "y");
  const auto window = static_cast<std::int64_t>(window_ps);
  std::uint64_t count = 0;
  std::size_t lo = 0;
  for (std::uint64_t xi : x) {
    // 2 |t_y - t_x - lag| <= window
    const std::int64_t centre = static_cast<std::int64_t>(xi) + lag_ps;
    while (lo < y.size() && 2 * (static_cast<std::int64_t>(y[lo]) - centre) < -window) ++lo;
    for (std::size_t j = lo; j < y.size() && 2 * (static_cast<std::int64_t>(y[j]) - centre) <= window; ++j) ++count;
  }
  return count;
}

}  // namespace franson::correlator
