#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "franson/fock.hpp"
#include "franson/network.hpp"

// Beamsplitter convention used everywhere in this module: transmission is
// real, reflection carries a factor i,
//
//   out0 = sqrt(T) in0 + i sqrt(1-T) in1,   out1 = i sqrt(1-T) in0 + sqrt(T) in1.
//
// In an interferometer built from two such splitters, port "1" is the cross
// output (out1) of the recombining splitter: its short and long paths carry the
// same power of i, so its fringe is 1 + V cos(phi) and port "2" sees 1 - V cos(phi).

namespace franson::interferometer {

using fock::ModeLabel;
using fock::ModeNetwork;

enum class Detector : std::uint8_t { kA1 = 0, kA2 = 1, kB1 = 2, kB2 = 3 };
inline constexpr std::array<Detector, 4> kDetectors = {Detector::kA1, Detector::kA2, Detector::kB1,
                                                       Detector::kB2};

std::string_view name(Detector d);
/// Throws std::invalid_argument for names other than A1, A2, B1, B2.
Detector detector_from_name(std::string_view name);
ModeLabel detector_mode(Detector d, int bin);
bool on_side_a(Detector d);

enum class PortConvention { kSymmetric };

struct FransonConfig {
  double phi_a = 0.0;
  double phi_b = 0.0;
  /// Source bins 0..n_bins-1; network bins run 0..n_bins because the long arm
  /// shifts by one bin.
  int n_bins = 2;
  double fbs_transmission = 0.5;
  double amzi_transmission = 0.5;
  PortConvention convention = PortConvention::kSymmetric;

  void validate() const;
};

struct MultiportConfig {
  int n = 3;
  int n_bins = 3;
  /// Feed each output port into an unbalanced interferometer (phases below)
  /// instead of a bare detector.
  bool with_amzis = false;
  std::vector<double> phases;

  void validate() const;
};

/// Port name of the j-th spatial output: "A", "B", "C", ...
std::string side_name(int j);

ModeNetwork beamsplitter(const ModeLabel& in0, const ModeLabel& in1, const ModeLabel& out0,
                         const ModeLabel& out1, double transmission = 0.5);

/// Unbalanced Mach-Zehnder on side `side` for network bins 0..n_bins.
/// Inputs  <side>.in(t), <side>.vac(t), <side>.delay(-1)
/// Outputs <side>1(t), <side>2(t), <side>.delay(n_bins + 1)
ModeNetwork build_amzi(double phi, const std::string& side, int n_bins, double transmission = 0.5);

/// Fiber splitter for bins 0..bins-1: src(t), fbs.vac(t) -> A.in(t), B.in(t).
ModeNetwork build_fbs(int bins, double transmission = 0.5);

/// Fiber splitter feeding two interferometers, over network bins 0..n_bins.
ModeNetwork build_franson(const FransonConfig& cfg);

/// e^{2 pi i j k / n} / sqrt(n).
Eigen::MatrixXcd dft_matrix(int n);

/// Discrete-Fourier splitter on src(t) (port 0) and mp.vac<j>(t) for t in
/// 0..n_bins-1 (0..n_bins with interferometers). Bare outputs are <side>(t).
ModeNetwork build_multiport(const MultiportConfig& cfg);

/// Conditions an FBS output state (modes A.in/B.in at bins 0 and 1) on one
/// photon per side in opposite bins.
std::pair<fock::FockState, double> postselect_bell_pair(const fock::FockState& fbs_output);

/// Fidelity of the photonic part (ancillas traced) with
/// (|1_A^e 1_B^l> + |1_A^l 1_B^e>)/sqrt2, up to a global phase.
double bell_fidelity(const fock::FockState& state);

/// One photon in each of the n bare multiport output ports, summed over bins.
std::pair<fock::FockState, double> postselect_one_per_port(const fock::FockState& multiport_output, int n);

}  // namespace franson::interferometer
