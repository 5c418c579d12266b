#pragma once

#include "franson/fock.hpp"
#include "json.hpp"

namespace franson::source {

using fock::Complex;
using fock::FockState;

inline constexpr double kPlanck = 6.62607015e-34;  // J s, exact SI value

/// Emitter and drive parameters. Times in seconds, frequency in Hz.
struct SourceParams {
  /// Weight of the emitted branch of the per-bin pure state; the photon
  /// probability per bin is q / 2 (the other half leaves the emitter excited).
  double q = 0.1;
  double nbar = 0.01;
  double t1 = 67.2e-12;
  double nu = 329.14e12;
  double tl = 10e-6;
  /// Laser-background fraction of the total mean photon number.
  double beta = 0.0;

  /// Throws ConfigError for out-of-range values.
  void validate() const;
  /// Throws ConfigError unless t1 < tau < tl.
  void check_timescales(double tau) const;
};

/// Keys: q, nbar, t1_ps, nu_thz, tl_us, beta. Unknown keys are rejected.
nlohmann::json to_json(const SourceParams& p);
SourceParams source_params_from_json(const nlohmann::json& j);

enum class BackgroundMode { kCoherent, kIncoherent };

/// Labels used for the bin's photon mode and emitter ancilla.
fock::ModeLabel photon_mode(int bin);
fock::ModeLabel emitter_mode(int bin);

/// sqrt(1-q)|0>|g> + sqrt(q) e^{i theta} (|0>|e> + |1>|g>)/sqrt2 on the bin's
/// photon mode and ancilla.
FockState bin_state(const SourceParams& params, int bin, double theta, int n_max = 3);

struct Displaced {
  FockState state;
  /// Probability removed by the photon-number truncation before renormalizing.
  double truncated_weight;
};

/// Applies the displacement D(alpha) to one photonic mode, keeping terms within
/// the basis truncation, then renormalizes.
Displaced displace(const FockState& state, std::size_t mode, Complex alpha);

/// Coherent laser leakage phase-locked to theta with
/// |alpha|^2 = beta / (1 - beta) * <n> of the (single) photonic mode.
/// beta = 0 returns the input unchanged. Needs n_max >= 2.
FockState add_laser_background(const FockState& state, double beta, double theta);

/// Mean background photon number per bin for a given RF mean photon number.
double background_mean(double beta, double rf_mean);

/// P_in = nbar h nu / T1.
double power_calibration(double nbar, double t1, double nu);

/// Weak-drive HBT autocorrelation (1 - e^{-t/2T1})^2 with an incoherent
/// background fraction beta: 1 - (1 - beta)^2 (1 - g_rf(t)).
double g2_source(const SourceParams& params, double t);

/// Inverse of g2_source at t = 0.
double beta_for_g2_zero(double g2_zero);

/// <a^dag^2 a^2> / <n>^2 of one mode of a state.
double g2_zero(const FockState& state, std::size_t mode);

}  // namespace franson::source
