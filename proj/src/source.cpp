#include "franson/source.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "franson/errors.hpp"

namespace franson::source {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// <m|D(alpha)|n>
Complex displacement_element(int m, int n, Complex alpha) {
  const double x = std::norm(alpha);
  const double envelope = std::exp(-0.5 * x);
  if (m >= n) {
    return std::sqrt(factorial(n) / factorial(m)) * std::pow(alpha, m - n) * envelope *
           std::assoc_laguerre(static_cast<unsigned>(n), static_cast<unsigned>(m - n), x);
  }
  return std::sqrt(factorial(m) / factorial(n)) * std::pow(-std::conj(alpha), n - m) * envelope *
         std::assoc_laguerre(static_cast<unsigned>(m), static_cast<unsigned>(n - m), x);
}

std::size_t single_photonic_mode(const FockState& state) {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < state.basis().mode_count(); ++i) {
    if (state.basis().is_emitter(i)) continue;
    if (found) throw std::invalid_argument("state has more than one photonic mode");
    found = i;
  }
  if (!found) throw std::invalid_argument("state has no photonic mode");
  return *found;
}

}  // namespace

void SourceParams::validate() const {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("source q must lie in [0, 1]");
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("source beta must lie in [0, 1)");
  if (!(nbar >= 0.0)) throw ConfigError("source nbar must be non-negative");
  if (!(t1 > 0.0) || !(nu > 0.0) || !(tl > 0.0)) throw ConfigError("source t1, nu and tl must be positive");
}

void SourceParams::check_timescales(double tau) const {
  if (!(t1 < tau && tau < tl)) throw ConfigError("need T1 < tau < T_L");
}

nlohmann::json to_json(const SourceParams& p) {
  return {{"q", p.q},           {"nbar", p.nbar},        {"t1_ps", p.t1 * 1e12},
          {"nu_thz", p.nu * 1e-12}, {"tl_us", p.tl * 1e6}, {"beta", p.beta}};
}

SourceParams source_params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("source section must be an object");
  static const std::set<std::string> keys = {"q", "nbar", "t1_ps", "nu_thz", "tl_us", "beta"};
  SourceParams p;
  for (const auto& [key, value] : j.items()) {
    if (!keys.count(key)) throw ConfigError("unknown source key '" + key + "'");
    if (!value.is_number()) throw ConfigError("source key '" + key + "' must be a number");
  }
  if (j.contains("q")) p.q = j["q"].get<double>();
  if (j.contains("nbar")) p.nbar = j["nbar"].get<double>();
  if (j.contains("t1_ps")) p.t1 = j["t1_ps"].get<double>() * 1e-12;
  if (j.contains("nu_thz")) p.nu = j["nu_thz"].get<double>() * 1e12;
  if (j.contains("tl_us")) p.tl = j["tl_us"].get<double>() * 1e-6;
  if (j.contains("beta")) p.beta = j["beta"].get<double>();
  p.validate();
  return p;
}

fock::ModeLabel photon_mode(int bin) { return fock::photonic("src", bin); }
fock::ModeLabel emitter_mode(int bin) { return fock::emitter("src", bin); }

FockState bin_state(const SourceParams& params, int bin, double theta, int n_max) {
  if (!(params.q >= 0.0 && params.q <= 1.0)) throw ConfigError("source q must lie in [0, 1]");
  auto basis = fock::make_basis({photon_mode(bin), emitter_mode(bin)}, n_max);
  const Complex branch = std::sqrt(params.q / 2.0) * std::polar(1.0, theta);
  FockState::Terms terms;
  terms.emplace(fock::Occupation{0, 0}, std::sqrt(1.0 - params.q));
  terms.emplace(fock::Occupation{0, 1}, branch);
  terms.emplace(fock::Occupation{1, 0}, branch);
  return FockState(std::move(basis), std::move(terms));
}

Displaced displace(const FockState& state, std::size_t mode, Complex alpha) {
  const auto& basis = state.basis();
  if (basis.is_emitter(mode)) throw std::invalid_argument("cannot displace an emitter ancilla");
  std::map<fock::Occupation, Complex> acc;
  for (const auto& [occ, amp] : state.terms()) {
    const int n = occ[mode];
    const int room = basis.n_max() - (basis.photons(occ) - n);
    for (int m = 0; m <= room; ++m) acc[occ.with(mode, m)] += displacement_element(m, n, alpha) * amp;
  }
  FockState raw(state.basis_ptr(), std::move(acc), true);
  const double kept = raw.norm_squared();
  return {raw.normalized(), state.norm_squared() - kept};
}

double background_mean(double beta, double rf_mean) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("beta must lie in [0, 1)");
  return beta / (1.0 - beta) * rf_mean;
}

FockState add_laser_background(const FockState& state, double beta, double theta) {
  if (beta == 0.0) return state;
  if (state.basis().n_max() < 2) throw std::invalid_argument("laser background needs n_max >= 2");
  const std::size_t mode = single_photonic_mode(state);
  const double mean = background_mean(beta, state.mean_number(mode));
  return displace(state, mode, std::polar(std::sqrt(mean), theta)).state;
}

double power_calibration(double nbar, double t1, double nu) {
  if (!(nbar > 0.0) || !(t1 > 0.0) || !(nu > 0.0)) {
    throw std::invalid_argument("power calibration inputs must be positive");
  }
  return nbar * kPlanck * nu / t1;
}

double g2_source(const SourceParams& params, double t) {
  if (t < 0.0) throw std::invalid_argument("g2_source needs t >= 0");
  const double rise = 1.0 - std::exp(-t / (2.0 * params.t1));
  const double g_rf = rise * rise;
  const double keep = 1.0 - params.beta;
  return 1.0 - keep * keep * (1.0 - g_rf);
}

double beta_for_g2_zero(double g2) {
  if (!(g2 >= 0.0 && g2 < 1.0)) throw std::invalid_argument("g2(0) must lie in [0, 1)");
  return 1.0 - std::sqrt(1.0 - g2);
}

double g2_zero(const FockState& state, std::size_t mode) {
  const double n = state.mean_number(mode);
  if (n <= 0.0) throw EmptySelectionError("g2(0) undefined for an empty mode");
  return fock::intensity_correlation(state, mode, mode) / (n * n);
}

}  // namespace franson::source
