#pragma once

#include <optional>
#include <string>
#include <vector>

#include "franson/chsh.hpp"
#include "franson/interferometer.hpp"
#include "franson/source.hpp"
#include "json.hpp"

namespace franson::analytics {

using interferometer::Detector;
using source::BackgroundMode;

enum class RateModel {
  /// Normally ordered <:n_X n_Y:> per bin pair (low detection efficiency).
  kIntensity,
  /// Joint threshold-click probability.
  kClick,
};

struct ModelParams {
  double q = 0.1;
  double beta = 0.0;
  BackgroundMode background = BackgroundMode::kCoherent;
  RateModel rate = RateModel::kIntensity;
  /// Photon-number truncation of the bin window.
  int n_max = 4;
  /// Longest correlation window, in bins; lags satisfy |lag| <= n_bins - 1.
  int n_bins = 8;

  void validate() const;
  nlohmann::json to_json() const;
};

struct DetectorPair {
  Detector x = Detector::kA1;
  Detector y = Detector::kB1;
};

/// Rate per bin of detections in x at bin t and y at bin t + lag, for a
/// stationary CW source. Throws std::invalid_argument for |lag| >= n_bins.
double coincidence_rate(const ModelParams& p, double phi_a, double phi_b, int lag, DetectorPair pair = {});

/// Same quantity from the full output state (network applied to the window
/// state, then the Fock-space correlation). Used as a cross-check.
double coincidence_rate_direct(const ModelParams& p, double phi_a, double phi_b, int lag, DetectorPair pair = {});

/// Detections per bin at one detector; phi is that side's phase.
double single_rate(const ModelParams& p, double phi, Detector d);

/// Model g2(0) of one bin of source light (HBT, ancilla traced).
double source_g2_zero(const ModelParams& p);

/// Background fraction at which source_g2_zero reaches `g2` (bisection on
/// [0, beta_max]). Throws std::invalid_argument when not bracketed.
double beta_for_model_g2(const ModelParams& p, double g2, double beta_max = 0.95);

enum class Normalization { kMax, kBaseline };

struct MapOptions {
  int max_lag = 3;
  /// Sub-bin points per bin for display; 0 keeps integer lags only.
  int fine_steps = 0;
  double tau = 1.07e-9;
  double t1 = 67.2e-12;
  Normalization normalization = Normalization::kMax;
  DetectorPair pair{};
  int jobs = 1;
};

struct CorrelationMap {
  std::vector<double> phi_a;
  /// In units of tau.
  std::vector<double> dt;
  /// values[i][k] at (phi_a[i], dt[k]).
  std::vector<std::vector<double>> values;
  double phi_b = 0;
  ModelParams params;
  Normalization normalization = Normalization::kMax;

  /// Long format: phi_a,dt,value.
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Throws std::invalid_argument on an empty grid.
CorrelationMap g2_map(const std::vector<double>& phi_a, double phi_b, const ModelParams& p,
                      const MapOptions& options = {});

/// Lag-0 expected counts for the sixteen CHSH (setting, pair) combinations
/// over `bins` bins, and the resulting S.
chsh::Result chsh_analytic(const ModelParams& p, const chsh::Settings& settings = {}, double bins = 1e7);

struct SweepRow {
  double beta = 0;
  double g2_zero = 0;
  double s = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Background fraction where S crosses 2, when bracketed by the grid.
  std::optional<double> crossover_beta;
  std::optional<double> crossover_g2;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// S and g2(0) over a background grid (values in [0, 1)), with the S = 2
/// crossing refined by bisection.
SweepResult s_vs_background(const std::vector<double>& betas, const ModelParams& p, int jobs = 1);

}  // namespace franson::analytics
