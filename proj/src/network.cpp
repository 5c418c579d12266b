#include "franson/network.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "franson/errors.hpp"
#include "franson/permanent.hpp"

namespace franson::fock {
namespace {

constexpr double kUnitarityTolerance = 1e-12;
constexpr double kZeroEntry = 1e-15;

std::map<ModeLabel, std::size_t> index_labels(const std::vector<ModeLabel>& labels, const char* what) {
  std::map<ModeLabel, std::size_t> idx;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].is_emitter()) {
      throw std::invalid_argument(std::string("emitter mode ") + labels[i].str() + " in network " + what);
    }
    if (!idx.emplace(labels[i], i).second) {
      throw std::invalid_argument(std::string("duplicate network ") + what + " label " + labels[i].str());
    }
  }
  return idx;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// Output amplitudes over m = 0..np+nq (photons left in mode p) for the lift
// of a 2x2 block acting on |np, nq>.
std::vector<Complex> lift_two_mode(const Eigen::Matrix2cd& b, int np, int nq) {
  const int total = np + nq;
  std::vector<Complex> out(total + 1, 0.0);
  const double norm_in = std::sqrt(factorial(np) * factorial(nq));
  for (int i = 0; i <= np; ++i) {
    Complex ti = binomial(np, i) * std::pow(b(0, 0), i) * std::pow(b(1, 0), np - i);
    for (int j = 0; j <= nq; ++j) {
      Complex tj = binomial(nq, j) * std::pow(b(0, 1), j) * std::pow(b(1, 1), nq - j);
      out[i + j] += ti * tj;
    }
  }
  for (int m = 0; m <= total; ++m) out[m] *= std::sqrt(factorial(m) * factorial(total - m)) / norm_in;
  return out;
}

using WorkMap = std::unordered_map<Occupation, Complex, OccupationHash>;

WorkMap apply_rotation(const WorkMap& in, const ModeNetwork::Rotation& r) {
  WorkMap out;
  out.reserve(in.size() * 2);
  std::map<std::pair<int, int>, std::vector<Complex>> cache;
  for (const auto& [occ, amp] : in) {
    int np = occ[r.p];
    int nq = occ[r.q];
    if (np + nq == 0) {
      out[occ] += amp;
      continue;
    }
    auto key = std::make_pair(np, nq);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, lift_two_mode(r.block, np, nq)).first;
    const auto& coeffs = it->second;
    for (int m = 0; m <= np + nq; ++m) {
      if (coeffs[m] == Complex(0.0)) continue;
      out[occ.with(r.p, m).with(r.q, np + nq - m)] += coeffs[m] * amp;
    }
  }
  for (auto it = out.begin(); it != out.end();) {
    if (std::abs(it->second) < kPruneThreshold) {
      it = out.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

}  // namespace

ModeNetwork::ModeNetwork(std::vector<ModeLabel> inputs, std::vector<ModeLabel> outputs, Eigen::MatrixXcd matrix,
                         bool causal)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), matrix_(std::move(matrix)), causal_(causal) {
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  if (n == 0) throw std::invalid_argument("network needs at least one mode");
  if (static_cast<Eigen::Index>(outputs_.size()) != n || matrix_.rows() != n || matrix_.cols() != n) {
    throw std::invalid_argument("network matrix must be square and match its label lists");
  }
  in_index_ = index_labels(inputs_, "input");
  out_index_ = index_labels(outputs_, "output");
  double err = unitarity_error();
  if (!(err < kUnitarityTolerance)) {
    throw std::invalid_argument("network matrix is not unitary (error " + std::to_string(err) + ")");
  }
  if (causal_) {
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (std::abs(matrix_(k, j)) > kZeroEntry && outputs_[k].bin < inputs_[j].bin) {
          throw std::invalid_argument("acausal network entry " + inputs_[j].str() + " -> " + outputs_[k].str());
        }
      }
    }
  }
  decompose();
}

ModeNetwork ModeNetwork::identity(const std::vector<ModeLabel>& labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  return ModeNetwork(labels, labels, Eigen::MatrixXcd::Identity(n, n));
}

ModeNetwork ModeNetwork::parallel(const ModeNetwork& a, const ModeNetwork& b) {
  std::vector<ModeLabel> in = a.inputs_;
  in.insert(in.end(), b.inputs_.begin(), b.inputs_.end());
  std::vector<ModeLabel> out = a.outputs_;
  out.insert(out.end(), b.outputs_.begin(), b.outputs_.end());
  const auto na = static_cast<Eigen::Index>(a.size());
  const auto nb = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(na + nb, na + nb);
  m.topLeftCorner(na, na) = a.matrix_;
  m.bottomRightCorner(nb, nb) = b.matrix_;
  return ModeNetwork(std::move(in), std::move(out), std::move(m), a.causal_ && b.causal_);
}

std::optional<std::size_t> ModeNetwork::input_index(const ModeLabel& label) const {
  auto it = in_index_.find(label);
  if (it == in_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ModeNetwork::output_index(const ModeLabel& label) const {
  auto it = out_index_.find(label);
  if (it == out_index_.end()) return std::nullopt;
  return it->second;
}

Complex ModeNetwork::amplitude(const ModeLabel& out, const ModeLabel& in) const {
  auto k = output_index(out);
  auto j = input_index(in);
  if (!k || !j) throw std::invalid_argument("unknown network label " + (k ? in.str() : out.str()));
  return matrix_(static_cast<Eigen::Index>(*k), static_cast<Eigen::Index>(*j));
}

double ModeNetwork::unitarity_error() const {
  const auto n = matrix_.rows();
  return (matrix_.adjoint() * matrix_ - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

ModeNetwork ModeNetwork::then(const ModeNetwork& next) const {
  // Middle layer: this network's outputs plus next's inputs not fed by them.
  std::vector<ModeLabel> middle = outputs_;
  std::vector<ModeLabel> extra_in;
  for (const auto& l : next.inputs_) {
    if (!out_index_.count(l)) extra_in.push_back(l);
  }
  middle.insert(middle.end(), extra_in.begin(), extra_in.end());
  std::vector<ModeLabel> in = inputs_;
  in.insert(in.end(), extra_in.begin(), extra_in.end());

  std::vector<ModeLabel> pass_out;
  for (const auto& l : outputs_) {
    if (!next.in_index_.count(l)) pass_out.push_back(l);
  }
  std::vector<ModeLabel> out = next.outputs_;
  out.insert(out.end(), pass_out.begin(), pass_out.end());

  const auto n = static_cast<Eigen::Index>(middle.size());
  const auto na = static_cast<Eigen::Index>(size());
  Eigen::MatrixXcd first = Eigen::MatrixXcd::Identity(n, n);
  first.topLeftCorner(na, na) = matrix_;

  std::map<ModeLabel, Eigen::Index> mid_index;
  for (Eigen::Index i = 0; i < n; ++i) mid_index.emplace(middle[i], i);
  Eigen::MatrixXcd second = Eigen::MatrixXcd::Zero(n, n);
  const auto nb = static_cast<Eigen::Index>(next.size());
  for (Eigen::Index k = 0; k < nb; ++k) {
    for (Eigen::Index j = 0; j < nb; ++j) second(k, mid_index.at(next.inputs_[j])) = next.matrix_(k, j);
  }
  for (std::size_t p = 0; p < pass_out.size(); ++p) {
    second(nb + static_cast<Eigen::Index>(p), mid_index.at(pass_out[p])) = 1.0;
  }
  return ModeNetwork(std::move(in), std::move(out), second * first, causal_ && next.causal_);
}

ModeNetwork ModeNetwork::adjoint() const { return ModeNetwork(outputs_, inputs_, matrix_.adjoint(), false); }

void ModeNetwork::decompose() {
  // Null the sub-diagonal with left-acting rotations on adjacent rows:
  // G_K ... G_1 U = D, hence U = G_1^dag ... G_K^dag D.
  Eigen::MatrixXcd v = matrix_;
  const auto n = v.rows();
  for (Eigen::Index c = 0; c + 1 < n; ++c) {
    for (Eigen::Index r = n - 1; r > c; --r) {
      Complex b = v(r, c);
      if (std::abs(b) < kZeroEntry) continue;
      Complex a = v(r - 1, c);
      double rho = std::hypot(std::abs(a), std::abs(b));
      Eigen::Matrix2cd g;
      g << std::conj(a) / rho, std::conj(b) / rho, -b / rho, a / rho;
      Eigen::Matrix<Complex, 2, Eigen::Dynamic> rows(2, n);
      rows.row(0) = v.row(r - 1);
      rows.row(1) = v.row(r);
      rows = g * rows;
      v.row(r - 1) = rows.row(0);
      v.row(r) = rows.row(1);
      rotations_.push_back({static_cast<std::size_t>(r - 1), static_cast<std::size_t>(r), g.adjoint()});
    }
  }
  phases_ = v.diagonal();
}

FockState apply_network(const FockState& state, const ModeNetwork& net) {
  const auto& basis = state.basis();
  const std::size_t m = net.size();
  // Layout: network positions first, ancillas after.
  std::vector<std::size_t> position(basis.mode_count());
  std::vector<ModeLabel> ancillas;
  for (std::size_t i = 0; i < basis.mode_count(); ++i) {
    const auto& label = basis.modes()[i];
    if (label.is_emitter()) {
      position[i] = m + ancillas.size();
      ancillas.push_back(label);
    } else {
      auto j = net.input_index(label);
      if (!j) throw std::invalid_argument("state mode " + label.str() + " is not a network input");
      position[i] = *j;
    }
  }
  const std::size_t width = m + ancillas.size();

  WorkMap work;
  for (const auto& [occ, amp] : state.terms()) {
    std::vector<std::uint8_t> counts(width, 0);
    for (std::size_t i = 0; i < occ.size(); ++i) counts[position[i]] = static_cast<std::uint8_t>(occ[i]);
    Complex a = amp;
    for (std::size_t j = 0; j < m; ++j) {
      if (counts[j]) a *= std::pow(net.phases()[static_cast<Eigen::Index>(j)], static_cast<int>(counts[j]));
    }
    work[Occupation(std::move(counts))] += a;
  }
  const auto& rots = net.rotations();
  for (auto it = rots.rbegin(); it != rots.rend(); ++it) work = apply_rotation(work, *it);

  std::vector<ModeLabel> out_modes = net.outputs();
  out_modes.insert(out_modes.end(), ancillas.begin(), ancillas.end());
  auto out_basis = make_basis(std::move(out_modes), basis.n_max());
  FockState::Terms terms;
  for (auto& [occ, amp] : work) {
    if (out_basis->photons(occ) > basis.n_max()) {
      throw TruncationError("network output term exceeds n_max=" + std::to_string(basis.n_max()));
    }
    terms.emplace(occ, amp);
  }
  return FockState(std::move(out_basis), std::move(terms), state.post_selected());
}

Complex amplitude_oracle(const ModeNetwork& net, const Occupation& in, const Occupation& out) {
  if (in.size() != net.size() || out.size() != net.size()) {
    throw std::invalid_argument("oracle occupations must span the network modes");
  }
  if (in.total() != out.total()) {
    throw std::invalid_argument("oracle: input and output photon numbers differ");
  }
  const int n = in.total();
  std::vector<Eigen::Index> rows, cols;
  double norm = 1.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (int r = 0; r < out[k]; ++r) rows.push_back(static_cast<Eigen::Index>(k));
    norm *= factorial(out[k]);
  }
  for (std::size_t j = 0; j < in.size(); ++j) {
    for (int r = 0; r < in[j]; ++r) cols.push_back(static_cast<Eigen::Index>(j));
    norm *= factorial(in[j]);
  }
  Eigen::MatrixXcd sub(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) sub(r, c) = net.matrix()(rows[r], cols[c]);
  }
  return permanent(sub) / std::sqrt(norm);
}

}  // namespace franson::fock
