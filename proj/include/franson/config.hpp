#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "franson/analytics.hpp"
#include "franson/montecarlo.hpp"
#include "franson/source.hpp"
#include "json.hpp"

namespace franson::config {

struct NetworkSection {
  double tau_ps = 1070;
  double phi_a = 0.0;
  double phi_b = 0.0;
  double fbs_transmission = 0.5;
  double amzi_transmission = 0.5;
  int multiport_n = 3;
};

struct DetectorSection {
  double efficiency = 1.0;
  double jitter_ps = 0.0;
  double dark_rate_hz = 0.0;
  double dead_time_ps = 0.0;
};

struct MonteCarloSection {
  double duration_s = 1.07e-2;
  std::uint64_t seed = 1;
  int window = 8;
  int n_max = 3;
  /// Phase points per fringe in simulated scans.
  int phi_points = 12;
  DetectorSection detector;
};

struct CorrelatorSection {
  std::uint64_t bin_ps = 1070;
  std::uint64_t max_lag_ps = 4280;
  /// Full width of the coincidence window used for counting.
  std::uint64_t window_ps = 268;
};

struct AnalysisSection {
  std::string background = "coherent";
  std::string rate_model = "intensity";
  std::string normalization = "max";
  int n_max = 4;
  int max_lag = 3;
  int fine_steps = 0;
  int phi_points = 25;
  double chsh_bins = 1e7;
  std::vector<double> betas = {0.0, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.43, 0.5, 0.6, 0.7, 0.8};
  /// When > 0, fringe scans add laser background until the model lag-0
  /// visibility drops to this value.
  double target_visibility = 0.0;
  int jobs = 1;
};

struct Config {
  source::SourceParams source;
  NetworkSection network;
  MonteCarloSection montecarlo;
  CorrelatorSection correlator;
  AnalysisSection analysis;

  /// Throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
  /// FNV-1a of the canonical JSON, 16 hex digits.
  std::string hash() const;

  analytics::ModelParams model() const;
  analytics::MapOptions map_options() const;
  source::BackgroundMode background_mode() const;
  montecarlo::RunConfig run_config(double phi_a, double phi_b) const;
};

/// Strict parse: every key must be known; missing keys keep their defaults.
Config from_json(const nlohmann::json& j);

/// Applies "section.key=value" to a JSON document. The value is parsed as
/// JSON when possible and taken as a string otherwise. Unknown keys throw
/// ConfigError.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Defaults, then the optional file, then the overrides in order.
Config load(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides = {});

std::string fnv1a_hex(std::string_view data);

}  // namespace franson::config
