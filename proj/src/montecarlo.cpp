#include "franson/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "franson/errors.hpp"
#include "franson/network.hpp"
#include "franson/rng.hpp"

namespace franson::montecarlo {
namespace {

constexpr int kMaxDim = 21;
using Small = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
constexpr int kBackgroundPhases = 8;

struct Outcome {
  std::array<std::uint8_t, 4> counts;
  Small kraus;  // pending-mode occupation x input basis
  Small effect_t;  // (K^dagger K)^T, so p = Re sum(effect_t .* rho)
};

// One time step: the pending long-arm mode P and the new source bin s enter,
// the four detectors at this bin and the new pending mode leave.
struct Step {
  int n_src;
  std::vector<std::pair<int, int>> inputs;  // (n_P, n_s)
  std::vector<Outcome> outcomes;            // vacuum first
};

Step build_step(const interferometer::FransonConfig& franson, int n_src, int n_max) {
  interferometer::FransonConfig cfg = franson;
  cfg.n_bins = 2;
  const auto net = interferometer::build_franson(cfg);
  Eigen::VectorXcd lng(4), shrt(4);
  for (int d = 0; d < 4; ++d) {
    const auto mode = interferometer::detector_mode(static_cast<Detector>(d), 1);
    lng(d) = net.amplitude(mode, fock::photonic("src", 0));
    shrt(d) = net.amplitude(mode, fock::photonic("src", 1));
  }
  const double long_weight = lng.squaredNorm();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(5, 5);
  u.col(0).head(4) = lng / std::sqrt(long_weight);
  u.col(1).head(4) = shrt;
  u(4, 1) = std::sqrt(long_weight);
  // Complete to a unitary with Gram-Schmidt on the standard basis.
  int filled = 2;
  for (int k = 0; k < 5 && filled < 5; ++k) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Unit(5, k);
    for (int c = 0; c < filled; ++c) v -= u.col(c).dot(v) * u.col(c);
    if (v.norm() > 1e-8) u.col(filled++) = v.normalized();
  }
  std::vector<fock::ModeLabel> in = {fock::photonic("mc.P", 0), fock::photonic("mc.s", 0), fock::photonic("mc.x1", 0),
                                     fock::photonic("mc.x2", 0), fock::photonic("mc.x3", 0)};
  std::vector<fock::ModeLabel> out;
  for (auto d : interferometer::kDetectors) out.push_back(interferometer::detector_mode(d, 0));
  out.push_back(fock::photonic("mc.L", 0));
  const fock::ModeNetwork step_net(in, out, u);

  Step step;
  step.n_src = n_src;
  for (int i = 0; i <= n_src; ++i) {
    for (int j = 0; j <= n_src; ++j) {
      if (i + j <= n_max) step.inputs.emplace_back(i, j);
    }
  }
  const int dim_in = static_cast<int>(step.inputs.size());
  if (dim_in > kMaxDim) throw ConfigError("montecarlo truncation too large");
  auto basis = fock::make_basis(in, n_max);
  std::map<std::array<std::uint8_t, 4>, Small> kraus;
  for (int col = 0; col < dim_in; ++col) {
    auto [i, j] = step.inputs[static_cast<std::size_t>(col)];
    const auto psi = fock::FockState::from_occupation(basis, {i, j, 0, 0, 0});
    const auto out_state = fock::apply_network(psi, step_net);
    for (const auto& [occ, amp] : out_state.terms()) {
      std::array<std::uint8_t, 4> m = {static_cast<std::uint8_t>(occ[0]), static_cast<std::uint8_t>(occ[1]),
                                       static_cast<std::uint8_t>(occ[2]), static_cast<std::uint8_t>(occ[3])};
      auto [it, fresh] = kraus.try_emplace(m);
      if (fresh) it->second = Small::Zero(n_src + 1, dim_in);
      it->second(occ[4], col) = amp;
    }
  }
  std::vector<Outcome> outcomes;
  for (auto& [m, k] : kraus) {
    Small e = (k.adjoint() * k).transpose();
    outcomes.push_back({m, std::move(k), std::move(e)});
  }
  std::stable_sort(outcomes.begin(), outcomes.end(), [](const Outcome& a, const Outcome& b) {
    return a.counts[0] + a.counts[1] + a.counts[2] + a.counts[3] < b.counts[0] + b.counts[1] + b.counts[2] + b.counts[3];
  });
  step.outcomes = std::move(outcomes);
  return step;
}

// Reduced photon state of one source bin (ancilla traced) for each background phase.
std::vector<Small> source_states(const RunConfig& cfg, int n_src) {
  const bool incoherent = cfg.background == source::BackgroundMode::kIncoherent && cfg.source.beta > 0;
  std::vector<Small> out;
  for (int k = 0; k < (incoherent ? kBackgroundPhases : 1); ++k) {
    auto s = source::bin_state(cfg.source, 0, 0.0, n_src);
    s = source::add_laser_background(s, cfg.source.beta, 2 * std::numbers::pi * k / kBackgroundPhases);
    const Eigen::MatrixXcd rho = fock::reduced_density_matrix(s, 0);
    Small padded = Small::Zero(n_src + 1, n_src + 1);
    const auto d = std::min<Eigen::Index>(rho.rows(), n_src + 1);
    padded.topLeftCorner(d, d) = rho.topLeftCorner(d, d);
    out.push_back(padded);
  }
  return out;
}

std::uint64_t to_ps(double seconds) { return static_cast<std::uint64_t>(std::llround(seconds * 1e12)); }

}  // namespace

void DetectorParams::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw ConfigError("detector efficiency must lie in [0, 1]");
  if (!(jitter >= 0.0) || !(dark_rate >= 0.0) || !(dead_time >= 0.0)) {
    throw ConfigError("detector jitter, dark rate and dead time must be >= 0");
  }
}

std::uint64_t RunConfig::bins() const { return static_cast<std::uint64_t>(std::llround(duration / tau)); }
std::uint64_t RunConfig::tau_ps() const { return to_ps(tau); }

void RunConfig::validate() const {
  if (!(duration > 0.0) || !(tau > 0.0)) throw ConfigError("duration and tau must be positive");
  if (std::abs(tau * 1e12 - std::round(tau * 1e12)) > 1e-6) throw ConfigError("tau must be a whole number of ps");
  if (window < 4) throw ConfigError("montecarlo window must be >= 4 bins");
  if (bins() < static_cast<std::uint64_t>(window)) throw ConfigError("run must cover at least one window");
  if (n_max < 2 || n_max > 5) throw ConfigError("montecarlo n_max must lie in [2, 5]");
  source.validate();
  source.check_timescales(tau);
  franson.validate();
  for (const auto& d : detectors) d.validate();
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json dets = nlohmann::json::array();
  for (const auto& d : detectors) {
    dets.push_back({{"efficiency", d.efficiency},
                    {"jitter_ps", d.jitter * 1e12},
                    {"dark_rate_hz", d.dark_rate},
                    {"dead_time_ps", d.dead_time * 1e12}});
  }
  return {{"duration_s", duration},
          {"tau_ps", tau * 1e12},
          {"bins", bins()},
          {"source", source::to_json(source)},
          {"phi_a", franson.phi_a},
          {"phi_b", franson.phi_b},
          {"background", background == source::BackgroundMode::kCoherent ? "coherent" : "incoherent"},
          {"detectors", dets},
          {"seed", seed},
          {"window", window},
          {"n_max", n_max}};
}

nlohmann::json GroundTruth::to_json() const {
  return {{"bins", bins},
          {"photons", photons},
          {"clicks", clicks},
          {"tags", tags},
          {"multi_photon_clicks", multi_photon_clicks},
          {"max_truncated_weight", max_truncated_weight}};
}

PhaseWalk::PhaseWalk(double tl, double tau, std::uint64_t seed, double theta0)
    : sigma_(std::isinf(tl) ? 0.0 : std::sqrt(2.0 * tau / tl)), seed_(seed), theta_(theta0) {
  if (!(tl > tau)) throw std::invalid_argument("phase walk needs tl > tau");
}

double PhaseWalk::at(std::uint64_t bin) {
  if (bin + 1 < next_) throw std::invalid_argument("phase walk bins must be requested in order");
  while (next_ <= bin) {
    if (next_ > 0 && sigma_ > 0) {
      rng::CounterEngine e(seed_, rng::kPhase, next_);
      theta_ += sigma_ * std::normal_distribution<double>()(e);
    }
    ++next_;
  }
  return theta_;
}

std::vector<double> phase_walk(double tl, double tau, std::uint64_t seed, std::uint64_t bins, double theta0) {
  PhaseWalk walk(tl, tau, seed, theta0);
  std::vector<double> out(bins);
  for (std::uint64_t t = 0; t < bins; ++t) out[t] = walk.at(t);
  return out;
}

RunResult generate(const RunConfig& cfg) {
  cfg.validate();
  const int n_src = cfg.source.beta > 0 ? cfg.n_max : 1;
  const Step step = build_step(cfg.franson, n_src, cfg.n_max);
  const auto rho_sources = source_states(cfg, n_src);
  const int dim_in = static_cast<int>(step.inputs.size());
  const std::uint64_t bins = cfg.bins();
  const std::uint64_t tau_ps = cfg.tau_ps();

  RunResult result;
  std::array<std::vector<std::uint64_t>, 4> raw;
  GroundTruth& truth = result.truth;
  truth.bins = bins;

  PhaseWalk walk(cfg.source.tl, cfg.tau, cfg.seed, cfg.initial_phase);
  Small rho_p = Small::Zero(n_src + 1, n_src + 1);
  rho_p(0, 0) = 1.0;
  Small rho_s(n_src + 1, n_src + 1), rho_in(dim_in, dim_in), tmp;

  const auto window = static_cast<std::uint64_t>(cfg.window);
  for (std::uint64_t start = 0; start < bins; start += window) {
    const std::uint64_t stop = std::min(bins, start + window);
    for (std::uint64_t t = start; t < stop; ++t) {
      const double theta = walk.at(t);
      std::size_t bg = 0;
      if (rho_sources.size() > 1) {
        rng::CounterEngine e(cfg.seed, rng::kBackground, t);
        bg = static_cast<std::size_t>(e() % rho_sources.size());
      }
      const Small& rs0 = rho_sources[bg];
      for (int a = 0; a <= n_src; ++a) {
        for (int b = 0; b <= n_src; ++b) rho_s(a, b) = rs0(a, b) * std::polar(1.0, theta * (a - b));
      }
      double trace = 0.0;
      for (int r = 0; r < dim_in; ++r) {
        auto [i, j] = step.inputs[static_cast<std::size_t>(r)];
        for (int c = 0; c < dim_in; ++c) {
          auto [k, l] = step.inputs[static_cast<std::size_t>(c)];
          rho_in(r, c) = rho_p(i, k) * rho_s(j, l);
        }
        trace += rho_in(r, r).real();
      }
      truth.max_truncated_weight = std::max(truth.max_truncated_weight, 1.0 - trace);
      if (trace < 1.0) rho_in /= trace;

      rng::CounterEngine e(cfg.seed, rng::kOutcome, t);
      const double u = e.uniform();
      double cum = 0.0;
      const Outcome* chosen = nullptr;
      double chosen_p = 0.0;
      for (const auto& o : step.outcomes) {
        const double p = (o.effect_t.array() * rho_in.array()).sum().real();
        if (p <= 0.0) continue;
        cum += p;
        chosen = &o;
        chosen_p = p;
        // Rounding can leave u just above the final cumulative sum; the last
        // outcome with p > 0 is kept then.
        if (u < cum) break;
      }
      tmp.noalias() = chosen->kraus.lazyProduct(rho_in);
      rho_p.noalias() = tmp.lazyProduct(chosen->kraus.adjoint()) / chosen_p;
      int total = 0;
      for (std::size_t d = 0; d < 4; ++d) {
        const int n = chosen->counts[d];
        if (n == 0) continue;
        total += n;
        truth.photons[d] += static_cast<std::uint64_t>(n);
        ++truth.clicks[d];
        raw[d].push_back(t * tau_ps);
      }
      if (total > 1) ++truth.multi_photon_clicks;
    }
  }

  const std::uint64_t duration_ps = bins * tau_ps;
  for (std::size_t d = 0; d < 4; ++d) {
    result.streams[d].channel = static_cast<Detector>(d);
    result.streams[d].timestamps =
        apply_detector_model(raw[d], cfg.detectors[d], cfg.seed, rng::kDetector + d, duration_ps);
    truth.tags[d] = result.streams[d].timestamps.size();
  }
  return result;
}

std::vector<std::uint64_t> apply_detector_model(const std::vector<std::uint64_t>& tags, const DetectorParams& det,
                                                std::uint64_t seed, std::uint64_t stream, std::uint64_t duration_ps) {
  det.validate();
  if (!std::is_sorted(tags.begin(), tags.end())) throw std::invalid_argument("detector model needs sorted tags");
  std::vector<std::uint64_t> out;
  out.reserve(tags.size());
  const double jitter_ps = det.jitter * 1e12;
  bool moved = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    rng::CounterEngine e(seed, stream, i);
    if (det.efficiency < 1.0 && !(e.uniform() < det.efficiency)) continue;
    std::int64_t t = static_cast<std::int64_t>(tags[i]);
    if (jitter_ps > 0) {
      t += std::llround(jitter_ps * std::normal_distribution<double>()(e));
      t = std::max<std::int64_t>(t, 0);
      moved = true;
    }
    out.push_back(static_cast<std::uint64_t>(t));
  }
  if (moved) std::sort(out.begin(), out.end());

  if (det.dark_rate > 0 && duration_ps > 0) {
    rng::CounterEngine e(seed, stream, ~std::uint64_t{0});
    const auto n = std::poisson_distribution<std::uint64_t>(det.dark_rate * static_cast<double>(duration_ps) * 1e-12)(e);
    std::uniform_int_distribution<std::uint64_t> when(0, duration_ps - 1);
    const std::size_t before = out.size();
    for (std::uint64_t k = 0; k < n; ++k) out.push_back(when(e));
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(before), out.end());
    std::inplace_merge(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(before), out.end());
  }

  const std::uint64_t dead_ps = to_ps(det.dead_time);
  std::vector<std::uint64_t> kept;
  kept.reserve(out.size());
  for (std::uint64_t t : out) {
    if (kept.empty() || (t > kept.back() && t - kept.back() >= dead_ps)) kept.push_back(t);
  }
  return kept;
}

}  // namespace franson::montecarlo
