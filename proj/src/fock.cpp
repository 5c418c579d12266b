#include "franson/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "franson/errors.hpp"

namespace franson::fock {

std::string ModeLabel::str() const {
  std::ostringstream os;
  os << (is_emitter() ? "anc:" : "") << port << "@" << bin;
  return os.str();
}

Occupation::Occupation(std::vector<std::uint8_t> counts) : counts_(std::move(counts)) {
  total_ = std::accumulate(counts_.begin(), counts_.end(), 0);
}

Occupation::Occupation(std::initializer_list<int> counts) {
  counts_.reserve(counts.size());
  for (int c : counts) {
    if (c < 0 || c > 255) throw std::invalid_argument("occupation count out of range");
    counts_.push_back(static_cast<std::uint8_t>(c));
  }
  total_ = std::accumulate(counts_.begin(), counts_.end(), 0);
}

Occupation Occupation::with(std::size_t i, int count) const {
  if (count < 0 || count > 255) throw std::invalid_argument("occupation count out of range");
  Occupation out = *this;
  out.total_ += count - out.counts_[i];
  out.counts_[i] = static_cast<std::uint8_t>(count);
  return out;
}

bool Occupation::operator<(const Occupation& o) const {
  if (total_ != o.total_) return total_ < o.total_;
  // Reverse lexicographic: more photons in earlier modes sort first.
  return std::lexicographical_compare(o.counts_.begin(), o.counts_.end(), counts_.begin(),
                                      counts_.end());
}

std::string Occupation::str() const {
  std::string s;
  for (auto c : counts_) s += std::to_string(c);
  return s;
}

std::size_t OccupationHash::operator()(const Occupation& occ) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (auto c : occ.counts()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

FockBasis::FockBasis(std::vector<ModeLabel> modes, int n_max) : modes_(std::move(modes)), n_max_(n_max) {
  if (modes_.empty()) throw std::invalid_argument("basis needs at least one mode");
  if (n_max_ < 1) throw std::invalid_argument("basis truncation n_max must be >= 1");
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (!index_.emplace(modes_[i], i).second) {
      throw std::invalid_argument("duplicate mode label " + modes_[i].str());
    }
  }
}

std::optional<std::size_t> FockBasis::find(const ModeLabel& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FockBasis::index_of(const ModeLabel& label) const {
  auto idx = find(label);
  if (!idx) throw std::invalid_argument("unknown mode " + label.str());
  return *idx;
}

int FockBasis::photons(const Occupation& occ) const {
  int n = 0;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (!is_emitter(i)) n += occ[i];
  }
  return n;
}

std::vector<Occupation> FockBasis::enumerate() const {
  std::vector<Occupation> out;
  std::vector<std::uint8_t> counts(modes_.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i == modes_.size()) {
      out.emplace_back(counts);
      return;
    }
    int cap = is_emitter(i) ? 1 : left;
    for (int c = 0; c <= cap; ++c) {
      counts[i] = static_cast<std::uint8_t>(c);
      rec(i + 1, is_emitter(i) ? left : left - c);
    }
    counts[i] = 0;
  };
  rec(0, n_max_);
  std::sort(out.begin(), out.end());
  return out;
}

BasisPtr make_basis(std::vector<ModeLabel> modes, int n_max) {
  return std::make_shared<const FockBasis>(std::move(modes), n_max);
}

FockState::FockState(BasisPtr basis, Terms terms, bool post_selected)
    : basis_(std::move(basis)), terms_(std::move(terms)), post_selected_(post_selected) {
  if (!basis_) throw std::invalid_argument("state needs a basis");
  for (auto it = terms_.begin(); it != terms_.end();) {
    const auto& occ = it->first;
    if (occ.size() != basis_->mode_count()) {
      throw std::invalid_argument("occupation length does not match basis");
    }
    for (std::size_t i = 0; i < occ.size(); ++i) {
      if (basis_->is_emitter(i) && occ[i] > 1) {
        throw std::invalid_argument("emitter ancilla occupation must be 0 or 1");
      }
    }
    if (basis_->photons(occ) > basis_->n_max()) {
      throw TruncationError("term " + occ.str() + " exceeds n_max=" + std::to_string(basis_->n_max()));
    }
    if (it->second == Complex(0.0)) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

FockState FockState::vacuum(BasisPtr basis) {
  Occupation occ(std::vector<std::uint8_t>(basis->mode_count(), 0));
  return FockState(std::move(basis), {{occ, Complex(1.0)}});
}

FockState FockState::from_occupation(BasisPtr basis, const Occupation& occ) {
  return FockState(std::move(basis), {{occ, Complex(1.0)}});
}

Complex FockState::amplitude(const Occupation& occ) const {
  auto it = terms_.find(occ);
  return it == terms_.end() ? Complex(0.0) : it->second;
}

double FockState::norm_squared() const {
  double s = 0.0;
  for (const auto& [occ, amp] : terms_) s += std::norm(amp);
  return s;
}

FockState FockState::normalized() const {
  double n2 = norm_squared();
  if (n2 <= 0.0) throw EmptySelectionError("cannot normalize a zero state");
  Terms t;
  double inv = 1.0 / std::sqrt(n2);
  for (const auto& [occ, amp] : terms_) t.emplace(occ, amp * inv);
  return FockState(basis_, std::move(t), false);
}

FockState FockState::scaled(Complex factor) const {
  Terms t;
  for (const auto& [occ, amp] : terms_) t.emplace(occ, amp * factor);
  return FockState(basis_, std::move(t), true);
}

double FockState::mean_number(std::size_t mode) const {
  double s = 0.0;
  for (const auto& [occ, amp] : terms_) s += std::norm(amp) * occ[mode];
  return s;
}

FockState FockState::tensor(const FockState& other, int n_max) const {
  std::vector<ModeLabel> modes = basis_->modes();
  modes.insert(modes.end(), other.basis().modes().begin(), other.basis().modes().end());
  auto basis = make_basis(std::move(modes), n_max);
  Terms t;
  for (const auto& [oa, aa] : terms_) {
    for (const auto& [ob, ab] : other.terms()) {
      std::vector<std::uint8_t> counts(oa.counts().begin(), oa.counts().end());
      counts.insert(counts.end(), ob.counts().begin(), ob.counts().end());
      t.emplace(Occupation(std::move(counts)), aa * ab);
    }
  }
  return FockState(std::move(basis), std::move(t), post_selected_ || other.post_selected());
}

nlohmann::json FockState::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& [occ, amp] : terms_) {
    std::vector<int> counts(occ.counts().begin(), occ.counts().end());
    arr.push_back({{"occupation", counts}, {"re", amp.real()}, {"im", amp.imag()}});
  }
  return arr;
}

FockState apply_lowering(const FockState& state, const LoweringOperator& op) {
  std::unordered_map<Occupation, Complex, OccupationHash> acc;
  for (const auto& [occ, amp] : state.terms()) {
    for (const auto& [mode, coeff] : op) {
      if (mode >= occ.size()) throw std::invalid_argument("lowering operator mode out of range");
      int n = occ[mode];
      if (n == 0) continue;
      acc[occ.with(mode, n - 1)] += coeff * std::sqrt(static_cast<double>(n)) * amp;
    }
  }
  FockState::Terms t(acc.begin(), acc.end());
  return FockState(state.basis_ptr(), std::move(t), true);
}

std::pair<FockState, double> postselect(const FockState& state,
                                        const std::function<bool(const Occupation&)>& predicate) {
  FockState::Terms kept;
  double p = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    if (predicate(occ)) {
      kept.emplace(occ, amp);
      p += std::norm(amp);
    }
  }
  if (kept.empty() || p <= 0.0) throw EmptySelectionError("post-selection has zero probability");
  double inv = 1.0 / std::sqrt(p);
  for (auto& [occ, amp] : kept) amp *= inv;
  return {FockState(state.basis_ptr(), std::move(kept), false), p};
}

double detection_probability(const FockState& state, const std::map<ModeLabel, bool>& pattern) {
  std::vector<std::pair<std::size_t, bool>> idx;
  idx.reserve(pattern.size());
  for (const auto& [label, click] : pattern) idx.emplace_back(state.basis().index_of(label), click);
  double p = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    bool ok = std::all_of(idx.begin(), idx.end(),
                          [&](const auto& e) { return (occ[e.first] > 0) == e.second; });
    if (ok) p += std::norm(amp);
  }
  return p;
}

double intensity_correlation(const FockState& state, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    double ni = occ[i];
    double nj = (i == j) ? ni - 1.0 : static_cast<double>(occ[j]);
    s += std::norm(amp) * ni * nj;
  }
  return s;
}

Eigen::MatrixXcd reduced_density_matrix(const FockState& state, std::size_t mode) {
  int dim = 1;
  for (const auto& [occ, amp] : state.terms()) dim = std::max(dim, occ[mode] + 1);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  // Group by the occupation of all other modes (the traced environment).
  std::map<Occupation, std::vector<std::pair<int, Complex>>> env;
  for (const auto& [occ, amp] : state.terms()) env[occ.with(mode, 0)].emplace_back(occ[mode], amp);
  for (const auto& [rest, comps] : env) {
    for (const auto& [m, a] : comps) {
      for (const auto& [n, b] : comps) rho(m, n) += a * std::conj(b);
    }
  }
  return rho;
}

}  // namespace franson::fock
