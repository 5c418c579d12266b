#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "franson/interferometer.hpp"
#include "franson/source.hpp"
#include "franson/timetag.hpp"
#include "json.hpp"

namespace franson::montecarlo {

using interferometer::Detector;

struct DetectorParams {
  double efficiency = 1.0;
  /// Gaussian timing jitter sigma, seconds.
  double jitter = 0.0;
  double dark_rate = 0.0;  // Hz
  double dead_time = 0.0;  // s

  void validate() const;
};

struct RunConfig {
  double duration = 1.07e-2;  // s
  double tau = 1.07e-9;       // s, a whole number of picoseconds
  source::SourceParams source;
  interferometer::FransonConfig franson;
  source::BackgroundMode background = source::BackgroundMode::kCoherent;
  std::array<DetectorParams, 4> detectors{};
  std::uint64_t seed = 1;
  /// Bins generated per chunk. Results do not depend on it.
  int window = 8;
  /// Photon-number truncation per step (pending long-arm mode plus new bin).
  int n_max = 3;
  double initial_phase = 0.0;

  std::uint64_t bins() const;
  std::uint64_t tau_ps() const;
  /// Throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
};

using timetag::TimeTagStream;

struct GroundTruth {
  std::uint64_t bins = 0;
  std::array<std::uint64_t, 4> photons{};
  /// Bins with at least one photon per detector, before the detector model.
  std::array<std::uint64_t, 4> clicks{};
  std::array<std::uint64_t, 4> tags{};
  std::uint64_t multi_photon_clicks = 0;
  /// Largest probability dropped by the step truncation.
  double max_truncated_weight = 0.0;

  nlohmann::json to_json() const;
};

struct RunResult {
  std::array<TimeTagStream, 4> streams;
  GroundTruth truth;
};

/// Samples detection events bin by bin from the exact output distribution.
/// The pending long-arm mode is carried as a density matrix conditioned on
/// every earlier outcome, so chunks join without boundary effects.
RunResult generate(const RunConfig& cfg);

/// Laser phase per bin: Gaussian increments of variance 2 tau / tl.
class PhaseWalk {
 public:
  PhaseWalk(double tl, double tau, std::uint64_t seed, double theta0 = 0.0);
  /// Phase of bin `bin`; bins must be requested in increasing order.
  double at(std::uint64_t bin);

 private:
  double sigma_;
  std::uint64_t seed_;
  std::uint64_t next_ = 0;
  double theta_;
};

std::vector<double> phase_walk(double tl, double tau, std::uint64_t seed, std::uint64_t bins, double theta0 = 0.0);

/// Efficiency thinning, Gaussian jitter (re-sorted), Poisson dark counts over
/// [0, duration_ps), then dead time keeping the first tag. The output is
/// strictly increasing. `stream` selects an independent random stream.
std::vector<std::uint64_t> apply_detector_model(const std::vector<std::uint64_t>& tags, const DetectorParams& det,
                                                std::uint64_t seed, std::uint64_t stream, std::uint64_t duration_ps);

}  // namespace franson::montecarlo
