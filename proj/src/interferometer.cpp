#include "franson/interferometer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "franson/errors.hpp"

namespace franson::interferometer {
namespace {

using fock::photonic;

ModeNetwork stack(const std::vector<ModeNetwork>& parts) {
  ModeNetwork out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out = ModeNetwork::parallel(out, parts[i]);
  return out;
}

}  // namespace

std::string_view name(Detector d) {
  switch (d) {
    case Detector::kA1: return "A1";
    case Detector::kA2: return "A2";
    case Detector::kB1: return "B1";
    case Detector::kB2: return "B2";
  }
  return "?";
}

Detector detector_from_name(std::string_view n) {
  for (auto d : kDetectors) {
    if (name(d) == n) return d;
  }
  throw std::invalid_argument("unknown detector '" + std::string(n) + "'");
}

ModeLabel detector_mode(Detector d, int bin) { return photonic(std::string(name(d)), bin); }

bool on_side_a(Detector d) { return d == Detector::kA1 || d == Detector::kA2; }

void FransonConfig::validate() const {
  if (n_bins < 2) throw ConfigError("franson n_bins must be >= 2");
  if (!(fbs_transmission > 0.0 && fbs_transmission < 1.0) || !(amzi_transmission > 0.0 && amzi_transmission < 1.0)) {
    throw ConfigError("splitter transmissions must lie in (0, 1)");
  }
}

void MultiportConfig::validate() const {
  if (n < 2) throw ConfigError("multiport n must be >= 2");
  if (n > 26) throw ConfigError("multiport n must be <= 26");
  if (n_bins < 1) throw ConfigError("multiport n_bins must be >= 1");
  if (with_amzis && !phases.empty() && static_cast<int>(phases.size()) != n) {
    throw ConfigError("multiport needs one interferometer phase per port");
  }
}

std::string side_name(int j) { return std::string(1, static_cast<char>('A' + j)); }

ModeNetwork beamsplitter(const ModeLabel& in0, const ModeLabel& in1, const ModeLabel& out0, const ModeLabel& out1,
                         double transmission) {
  const double t = std::sqrt(transmission);
  const fock::Complex r(0.0, std::sqrt(1.0 - transmission));
  Eigen::MatrixXcd m(2, 2);
  m << t, r, r, t;
  return ModeNetwork({in0, in1}, {out0, out1}, m);
}

ModeNetwork build_amzi(double phi, const std::string& side, int n_bins, double transmission) {
  if (n_bins < 1) throw std::invalid_argument("amzi needs n_bins >= 1");
  std::vector<ModeNetwork> split, recombine;
  for (int t = 0; t <= n_bins; ++t) {
    split.push_back(beamsplitter(photonic(side + ".in", t), photonic(side + ".vac", t),
                                 photonic(side + ".short", t), photonic(side + ".long", t), transmission));
    recombine.push_back(beamsplitter(photonic(side + ".short", t), photonic(side + ".late", t),
                                     photonic(side + "2", t), photonic(side + "1", t), transmission));
  }
  // Delay line: a shift register over the window with a register mode at each end.
  std::vector<ModeLabel> in, out;
  in.push_back(photonic(side + ".delay", -1));
  out.push_back(photonic(side + ".late", 0));
  for (int t = 0; t <= n_bins; ++t) {
    in.push_back(photonic(side + ".long", t));
    out.push_back(t < n_bins ? photonic(side + ".late", t + 1) : photonic(side + ".delay", n_bins + 1));
  }
  const auto n = static_cast<Eigen::Index>(in.size());
  Eigen::MatrixXcd delay = std::polar(1.0, phi) * Eigen::MatrixXcd::Identity(n, n);
  ModeNetwork line(std::move(in), std::move(out), std::move(delay));
  return stack(split).then(line).then(stack(recombine));
}

ModeNetwork build_fbs(int bins, double transmission) {
  if (bins < 1) throw std::invalid_argument("fbs needs at least one bin");
  std::vector<ModeNetwork> parts;
  for (int t = 0; t < bins; ++t) {
    parts.push_back(beamsplitter(photonic("src", t), photonic("fbs.vac", t), photonic("A.in", t),
                                 photonic("B.in", t), transmission));
  }
  return stack(parts);
}

ModeNetwork build_franson(const FransonConfig& cfg) {
  cfg.validate();
  auto fbs = build_fbs(cfg.n_bins + 1, cfg.fbs_transmission);
  auto amzis = ModeNetwork::parallel(build_amzi(cfg.phi_a, "A", cfg.n_bins, cfg.amzi_transmission),
                                     build_amzi(cfg.phi_b, "B", cfg.n_bins, cfg.amzi_transmission));
  return fbs.then(amzis);
}

Eigen::MatrixXcd dft_matrix(int n) {
  Eigen::MatrixXcd u(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) u(j, k) = std::polar(scale, 2.0 * std::numbers::pi * j * k / n);
  }
  return u;
}

ModeNetwork build_multiport(const MultiportConfig& cfg) {
  cfg.validate();
  const int bins = cfg.with_amzis ? cfg.n_bins + 1 : cfg.n_bins;
  const Eigen::MatrixXcd u = dft_matrix(cfg.n);
  std::vector<ModeNetwork> parts;
  for (int t = 0; t < bins; ++t) {
    std::vector<ModeLabel> in, out;
    for (int j = 0; j < cfg.n; ++j) {
      in.push_back(j == 0 ? photonic("src", t) : photonic("mp.vac" + std::to_string(j), t));
      out.push_back(cfg.with_amzis ? photonic(side_name(j) + ".in", t) : photonic(side_name(j), t));
    }
    parts.emplace_back(std::move(in), std::move(out), u);
  }
  ModeNetwork splitter = stack(parts);
  if (!cfg.with_amzis) return splitter;
  std::vector<ModeNetwork> amzis;
  for (int j = 0; j < cfg.n; ++j) {
    double phi = cfg.phases.empty() ? 0.0 : cfg.phases[static_cast<std::size_t>(j)];
    amzis.push_back(build_amzi(phi, side_name(j), cfg.n_bins));
  }
  return splitter.then(stack(amzis));
}

std::pair<fock::FockState, double> postselect_bell_pair(const fock::FockState& fbs_output) {
  const auto& basis = fbs_output.basis();
  const std::size_t a0 = basis.index_of(photonic("A.in", 0));
  const std::size_t a1 = basis.index_of(photonic("A.in", 1));
  const std::size_t b0 = basis.index_of(photonic("B.in", 0));
  const std::size_t b1 = basis.index_of(photonic("B.in", 1));
  return fock::postselect(fbs_output, [&](const fock::Occupation& occ) {
    if (basis.photons(occ) != 2) return false;
    return (occ[a0] == 1 && occ[b1] == 1) || (occ[a1] == 1 && occ[b0] == 1);
  });
}

double bell_fidelity(const fock::FockState& state) {
  const auto& basis = state.basis();
  const std::size_t a0 = basis.index_of(photonic("A.in", 0));
  const std::size_t a1 = basis.index_of(photonic("A.in", 1));
  const std::size_t b0 = basis.index_of(photonic("B.in", 0));
  const std::size_t b1 = basis.index_of(photonic("B.in", 1));
  // Overlap per ancilla configuration; the photonic target is fixed.
  std::map<std::vector<std::uint8_t>, fock::Complex> overlaps;
  for (const auto& [occ, amp] : state.terms()) {
    if (basis.photons(occ) != 2) continue;
    bool first = occ[a0] == 1 && occ[b1] == 1;
    bool second = occ[a1] == 1 && occ[b0] == 1;
    if (!first && !second) continue;
    std::vector<std::uint8_t> anc;
    for (std::size_t i = 0; i < occ.size(); ++i) {
      if (basis.is_emitter(i)) anc.push_back(static_cast<std::uint8_t>(occ[i]));
    }
    overlaps[anc] += amp / std::sqrt(2.0);
  }
  double f = 0.0;
  for (const auto& [anc, c] : overlaps) f += std::norm(c);
  return f / state.norm_squared();
}

std::pair<fock::FockState, double> postselect_one_per_port(const fock::FockState& out, int n) {
  const auto& basis = out.basis();
  std::vector<int> port_of(basis.mode_count(), -1);
  for (std::size_t i = 0; i < basis.mode_count(); ++i) {
    const auto& label = basis.modes()[i];
    if (label.is_emitter()) continue;
    for (int j = 0; j < n; ++j) {
      if (label.port == side_name(j)) port_of[i] = j;
    }
  }
  return fock::postselect(out, [&](const fock::Occupation& occ) {
    std::vector<int> per_port(static_cast<std::size_t>(n), 0);
    for (std::size_t i = 0; i < occ.size(); ++i) {
      if (port_of[i] >= 0) per_port[static_cast<std::size_t>(port_of[i])] += occ[i];
    }
    for (int c : per_port) {
      if (c != 1) return false;
    }
    return true;
  });
}

}  // namespace franson::interferometer
