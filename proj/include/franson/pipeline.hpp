#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "franson/anchors.hpp"
#include "franson/chsh.hpp"
#include "franson/config.hpp"
#include "franson/montecarlo.hpp"
#include "json.hpp"

namespace franson::pipeline {

enum class Kind { kG2Map, kFringeScan, kChshTable, kBackgroundSweep, kBaselineStudy, kMultiportPostselect };
enum class Mode { kAnalytic, kMonteCarlo, kBoth };

std::string_view name(Kind k);
std::string_view name(Mode m);
/// Throw ConfigError for unknown names.
Kind kind_from_name(std::string_view s);
Mode mode_from_name(std::string_view s);

struct Experiment {
  Kind kind = Kind::kChshTable;
  Mode mode = Mode::kAnalytic;
  config::Config config;
  std::filesystem::path out_dir;
};

struct Report {
  Kind kind = Kind::kChshTable;
  Mode mode = Mode::kAnalytic;
  nlohmann::json results;
  std::vector<anchors::Comparison> comparisons;
  /// Names relative to the output directory.
  std::vector<std::string> files;

  std::string markdown() const;
};

/// Runs the experiment and writes its CSV/JSON data, results.json, report.md
/// and manifest.json into out_dir. Errors are rethrown with the experiment
/// name prepended (ConfigError stays ConfigError).
Report run(const Experiment& e);

/// n points on [0, 2 pi), or on [0, 2 pi] with `closed`.
std::vector<double> phase_grid(int n, bool closed = false);

/// Probability that n photons in n distinct bins leave an n-port DFT
/// splitter one per port.
double multiport_probability(int n);

/// Mean lag-0 A1/B1 fringe visibility of the model over fits at
/// phi_b = 0, pi/2, pi, 3 pi/2.
double model_visibility(const analytics::ModelParams& p);

/// Background fraction whose model visibility equals v (bisection).
/// Throws std::invalid_argument when v is not reachable.
double beta_for_visibility(const analytics::ModelParams& p, double v);

/// The configuration with source.beta set from analysis.target_visibility,
/// or unchanged when that is 0.
config::Config tuned(const config::Config& c);

/// Lag-0 coincidences of the four A/B detector pairs.
chsh::PairCounts count_pairs(const std::array<timetag::TimeTagStream, 4>& streams, std::uint64_t window_ps);

/// Seed of Monte-Carlo run k of an experiment.
std::uint64_t run_seed(const config::Config& c, std::size_t k);

/// Four simulated runs, one per setting (seeds run_seed(c, 0..3)).
chsh::Counts simulate_chsh(const config::Config& c, const chsh::Settings& settings = {}, int jobs = 1);

/// Writes via a temporary file and rename.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace franson::pipeline
