#include "franson/analytics.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "franson/errors.hpp"
#include "franson/parallel.hpp"

namespace franson::analytics {
namespace {

using fock::FockState;
using fock::ModeNetwork;
using interferometer::detector_mode;
using interferometer::on_side_a;

constexpr int kBackgroundPhases = 8;
constexpr double kTwoPi = 2 * std::numbers::pi;

// Source bins 0..bins-1; x and y are read at network bins tx and ty.
struct Window {
  int bins;
  int tx;
  int ty;
};

Window window_for(int lag) {
  if (lag == 0) return {2, 1, 1};
  if (lag == 1) return {3, 1, 2};
  return {4, 1, 3};
}

ModeNetwork franson_net(double phi_a, double phi_b, int bins) {
  interferometer::FransonConfig cfg;
  cfg.phi_a = phi_a;
  cfg.phi_b = phi_b;
  cfg.n_bins = bins;
  return interferometer::build_franson(cfg);
}

FockState bin_with_background(const ModelParams& p, int bin, double bg_phase) {
  source::SourceParams sp;
  sp.q = p.q;
  auto s = source::bin_state(sp, bin, 0.0, p.n_max);
  return source::add_laser_background(s, p.beta, bg_phase);
}

// Product of per-bin states, dropping terms above n_max and renormalizing.
FockState truncated_product(const std::vector<FockState>& parts, int n_max) {
  std::vector<fock::ModeLabel> modes;
  for (const auto& s : parts) modes.insert(modes.end(), s.basis().modes().begin(), s.basis().modes().end());
  auto basis = fock::make_basis(std::move(modes), n_max);

  struct Partial {
    std::vector<std::uint8_t> counts;
    int photons;
    fock::Complex amp;
  };
  std::vector<Partial> acc{{{}, 0, 1.0}};
  for (const auto& s : parts) {
    std::vector<Partial> next;
    for (const auto& a : acc) {
      for (const auto& [occ, amp] : s.terms()) {
        const int photons = a.photons + s.basis().photons(occ);
        if (photons > n_max) continue;
        Partial b{a.counts, photons, a.amp * amp};
        b.counts.insert(b.counts.end(), occ.counts().begin(), occ.counts().end());
        next.push_back(std::move(b));
      }
    }
    acc = std::move(next);
  }
  FockState::Terms terms;
  for (auto& a : acc) terms.emplace(fock::Occupation(std::move(a.counts)), a.amp);
  return FockState(std::move(basis), std::move(terms)).normalized();
}

// Window states with their weights: one for a phase-locked background, all
// background-phase combinations for an incoherent one.
template <typename Fn>
double average_over_background(const ModelParams& p, int bins, Fn&& fn) {
  const bool incoherent = p.background == BackgroundMode::kIncoherent && p.beta > 0;
  if (!incoherent) {
    std::vector<FockState> parts;
    for (int b = 0; b < bins; ++b) parts.push_back(bin_with_background(p, b, 0.0));
    return fn(truncated_product(parts, p.n_max));
  }
  std::vector<std::vector<FockState>> per_bin(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    for (int k = 0; k < kBackgroundPhases; ++k) {
      per_bin[static_cast<std::size_t>(b)].push_back(bin_with_background(p, b, kTwoPi * k / kBackgroundPhases));
    }
  }
  int combos = 1;
  for (int b = 0; b < bins; ++b) combos *= kBackgroundPhases;
  double sum = 0.0;
  for (int c = 0; c < combos; ++c) {
    std::vector<FockState> parts;
    for (int b = 0, code = c; b < bins; ++b, code /= kBackgroundPhases) {
      parts.push_back(per_bin[static_cast<std::size_t>(b)][static_cast<std::size_t>(code % kBackgroundPhases)]);
    }
    sum += fn(truncated_product(parts, p.n_max));
  }
  return sum / combos;
}

fock::LoweringOperator field(const ModeNetwork& net, const FockState& state, const fock::ModeLabel& out, int bins) {
  fock::LoweringOperator op;
  for (int b = 0; b < bins; ++b) {
    const fock::Complex u = net.amplitude(out, source::photon_mode(b));
    if (u != 0.0) op.emplace_back(state.basis().index_of(source::photon_mode(b)), u);
  }
  return op;
}

void check_lag(const ModelParams& p, int lag) {
  if (std::abs(lag) > p.n_bins - 1) {
    throw std::invalid_argument("lag " + std::to_string(lag) + " outside |lag| <= " + std::to_string(p.n_bins - 1));
  }
}

// Normalizes so that lag >= 0: detections in x at bin t, y at t + lag.
void orient(int& lag, DetectorPair& pair) {
  if (lag < 0) {
    lag = -lag;
    std::swap(pair.x, pair.y);
  }
}

double single_rate_impl(const ModelParams& p, double phi, Detector d, bool direct) {
  const auto net = on_side_a(d) ? franson_net(phi, 0.0, 2) : franson_net(0.0, phi, 2);
  const auto mode = detector_mode(d, 1);
  return average_over_background(p, 2, [&](const FockState& psi) {
    if (!direct && p.rate == RateModel::kIntensity) {
      return fock::apply_lowering(psi, field(net, psi, mode, 2)).norm_squared();
    }
    const auto out = fock::apply_network(psi, net);
    if (p.rate == RateModel::kClick) return fock::detection_probability(out, {{mode, true}});
    return out.mean_number(out.basis().index_of(mode));
  });
}

}  // namespace

void ModelParams::validate() const {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("q must lie in [0, 1]");
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("beta must lie in [0, 1)");
  if (n_max < 2) throw ConfigError("n_max must be >= 2");
  if (n_bins < 2) throw ConfigError("n_bins must be >= 2");
}

nlohmann::json ModelParams::to_json() const {
  return {{"q", q},
          {"beta", beta},
          {"background", background == BackgroundMode::kCoherent ? "coherent" : "incoherent"},
          {"rate_model", rate == RateModel::kIntensity ? "intensity" : "click"},
          {"n_max", n_max},
          {"n_bins", n_bins}};
}

double coincidence_rate(const ModelParams& p, double phi_a, double phi_b, int lag, DetectorPair pair) {
  p.validate();
  check_lag(p, lag);
  if (p.rate == RateModel::kClick) return coincidence_rate_direct(p, phi_a, phi_b, lag, pair);
  orient(lag, pair);
  if (lag >= 2 && p.background == BackgroundMode::kIncoherent && p.beta > 0) {
    // Disjoint bin groups of a mixed product state: the rate factorizes.
    return single_rate(p, on_side_a(pair.x) ? phi_a : phi_b, pair.x) *
           single_rate(p, on_side_a(pair.y) ? phi_a : phi_b, pair.y);
  }
  const Window w = window_for(lag);
  const auto net = franson_net(phi_a, phi_b, w.bins);
  const auto mx = detector_mode(pair.x, w.tx);
  const auto my = detector_mode(pair.y, w.ty);
  return average_over_background(p, w.bins, [&](const FockState& psi) {
    const auto ex = field(net, psi, mx, w.bins);
    const auto ey = field(net, psi, my, w.bins);
    return fock::apply_lowering(fock::apply_lowering(psi, ex), ey).norm_squared();
  });
}

double coincidence_rate_direct(const ModelParams& p, double phi_a, double phi_b, int lag, DetectorPair pair) {
  p.validate();
  check_lag(p, lag);
  orient(lag, pair);
  if (lag >= 2 && p.background == BackgroundMode::kIncoherent && p.beta > 0) {
    return single_rate_impl(p, on_side_a(pair.x) ? phi_a : phi_b, pair.x, true) *
           single_rate_impl(p, on_side_a(pair.y) ? phi_a : phi_b, pair.y, true);
  }
  const Window w = window_for(lag);
  const auto net = franson_net(phi_a, phi_b, w.bins);
  const auto mx = detector_mode(pair.x, w.tx);
  const auto my = detector_mode(pair.y, w.ty);
  return average_over_background(p, w.bins, [&](const FockState& psi) {
    const auto out = fock::apply_network(psi, net);
    if (p.rate == RateModel::kClick) return fock::detection_probability(out, {{mx, true}, {my, true}});
    return fock::intensity_correlation(out, out.basis().index_of(mx), out.basis().index_of(my));
  });
}

double single_rate(const ModelParams& p, double phi, Detector d) {
  p.validate();
  return single_rate_impl(p, phi, d, false);
}

double source_g2_zero(const ModelParams& p) {
  p.validate();
  const int phases = p.background == BackgroundMode::kIncoherent && p.beta > 0 ? kBackgroundPhases : 1;
  double pairs = 0.0, mean = 0.0;
  for (int k = 0; k < phases; ++k) {
    const auto s = bin_with_background(p, 0, kTwoPi * k / phases);
    pairs += fock::intensity_correlation(s, 0, 0);
    mean += s.mean_number(0);
  }
  pairs /= phases;
  mean /= phases;
  if (!(mean > 0)) throw EmptySelectionError("g2(0) undefined without photons");
  return pairs / (mean * mean);
}

double beta_for_model_g2(const ModelParams& p, double g2, double beta_max) {
  auto g = [&](double beta) {
    ModelParams m = p;
    m.beta = beta;
    return source_g2_zero(m) - g2;
  };
  double lo = 0.0, hi = beta_max;
  if (g(lo) * g(hi) > 0) throw std::invalid_argument("target g2(0) not reached on [0, beta_max]");
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) * g(lo) > 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::string CorrelationMap::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "phi_a,dt,value\n";
  for (std::size_t i = 0; i < phi_a.size(); ++i) {
    for (std::size_t k = 0; k < dt.size(); ++k) os << phi_a[i] << ',' << dt[k] << ',' << values[i][k] << '\n';
  }
  return os.str();
}

nlohmann::json CorrelationMap::to_json() const {
  return {{"phi_a", phi_a},
          {"dt", dt},
          {"values", values},
          {"metadata",
           {{"phi_b", phi_b},
            {"q", params.q},
            {"beta", params.beta},
            {"normalization", normalization == Normalization::kMax ? "max" : "baseline"},
            {"model", params.to_json()}}}};
}

CorrelationMap g2_map(const std::vector<double>& phi_a, double phi_b, const ModelParams& p, const MapOptions& options) {
  if (phi_a.empty()) throw std::invalid_argument("g2_map needs a non-empty phase grid");
  if (options.max_lag < 0 || options.fine_steps < 0) throw std::invalid_argument("g2_map lag options must be >= 0");
  check_lag(p, options.max_lag);
  const int lags = 2 * options.max_lag + 1;
  std::vector<std::vector<double>> integer(phi_a.size(), std::vector<double>(static_cast<std::size_t>(lags)));
  std::vector<double> baseline(phi_a.size());
  parallel_for(phi_a.size(), options.jobs, [&](std::size_t i) {
    for (int k = 0; k < lags; ++k) {
      integer[i][static_cast<std::size_t>(k)] = coincidence_rate(p, phi_a[i], phi_b, k - options.max_lag, options.pair);
    }
    baseline[i] = coincidence_rate(p, phi_a[i], phi_b, std::min(2, p.n_bins - 1), options.pair);
  });

  CorrelationMap map;
  map.phi_a = phi_a;
  map.phi_b = phi_b;
  map.params = p;
  map.normalization = options.normalization;
  if (options.fine_steps == 0) {
    for (int k = 0; k < lags; ++k) map.dt.push_back(k - options.max_lag);
  } else {
    const int points = 2 * options.max_lag * options.fine_steps + 1;
    for (int j = 0; j < points; ++j) map.dt.push_back(-options.max_lag + static_cast<double>(j) / options.fine_steps);
  }
  const double ratio = options.tau / options.t1;
  for (std::size_t i = 0; i < phi_a.size(); ++i) {
    std::vector<double> row;
    for (double dt : map.dt) {
      if (options.fine_steps == 0) {
        row.push_back(integer[i][static_cast<std::size_t>(std::lround(dt) + options.max_lag)]);
        continue;
      }
      double v = 0.0;
      for (int k = 0; k < lags; ++k) {
        v += integer[i][static_cast<std::size_t>(k)] * std::exp(-std::abs(dt - (k - options.max_lag)) * ratio);
      }
      row.push_back(v);
    }
    map.values.push_back(std::move(row));
  }
  if (options.normalization == Normalization::kBaseline) {
    for (std::size_t i = 0; i < phi_a.size(); ++i) {
      if (!(baseline[i] > 0)) throw std::domain_error("baseline rate is zero");
      for (double& v : map.values[i]) v /= baseline[i];
    }
  } else {
    double peak = 0.0;
    for (const auto& row : map.values) {
      for (double v : row) peak = std::max(peak, v);
    }
    if (peak > 0) {
      for (auto& row : map.values) {
        for (double& v : row) v /= peak;
      }
    }
  }
  return map;
}

chsh::Result chsh_analytic(const ModelParams& p, const chsh::Settings& settings, double bins) {
  chsh::Counts counts;
  counts.settings = settings;
  for (int k = 0; k < 4; ++k) {
    auto [pa, pb] = settings.pair(k);
    auto rate = [&](Detector x, Detector y) { return bins * coincidence_rate(p, pa, pb, 0, {x, y}); };
    counts.per_setting[static_cast<std::size_t>(k)] = {rate(Detector::kA1, Detector::kB1), rate(Detector::kA1, Detector::kB2),
                                                       rate(Detector::kA2, Detector::kB1), rate(Detector::kA2, Detector::kB2)};
  }
  return chsh::chsh(counts);
}

std::string SweepResult::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "beta,g2_0,S\n";
  for (const auto& r : rows) os << r.beta << ',' << r.g2_zero << ',' << r.s << '\n';
  return os.str();
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) rs.push_back({{"beta", r.beta}, {"g2_0", r.g2_zero}, {"S", r.s}});
  nlohmann::json j = {{"rows", rs}};
  j["crossover_beta"] = crossover_beta ? nlohmann::json(*crossover_beta) : nlohmann::json(nullptr);
  j["crossover_g2_0"] = crossover_g2 ? nlohmann::json(*crossover_g2) : nlohmann::json(nullptr);
  return j;
}

SweepResult s_vs_background(const std::vector<double>& betas, const ModelParams& p, int jobs) {
  for (double b : betas) {
    if (!(b >= 0.0 && b < 1.0)) throw std::invalid_argument("background fractions must lie in [0, 1)");
  }
  auto at = [&](double beta) {
    ModelParams m = p;
    m.beta = beta;
    return SweepRow{beta, source_g2_zero(m), chsh_analytic(m).s};
  };
  SweepResult result;
  result.rows.resize(betas.size());
  parallel_for(betas.size(), jobs, [&](std::size_t i) { result.rows[i] = at(betas[i]); });
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    SweepRow lo = result.rows[i - 1], hi = result.rows[i];
    if ((lo.s - 2.0) * (hi.s - 2.0) > 0 || lo.s == hi.s) continue;
    for (int it = 0; it < 40; ++it) {
      SweepRow mid = at(0.5 * (lo.beta + hi.beta));
      if ((mid.s - 2.0) * (lo.s - 2.0) > 0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    SweepRow cross = at(0.5 * (lo.beta + hi.beta));
    result.crossover_beta = cross.beta;
    result.crossover_g2 = cross.g2_zero;
    break;
  }
  return result;
}

}  // namespace franson::analytics
