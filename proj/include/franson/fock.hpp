#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace franson::fock {

using Complex = std::complex<double>;

/// Amplitudes below this magnitude are dropped after every two-mode rotation.
inline constexpr double kPruneThreshold = 1e-15;

enum class ModeKind : std::uint8_t { kPhotonic = 0, kEmitter = 1 };

/// A field mode (or emitter two-level ancilla) identified by port and time bin.
/// Time bins are counted in units of the interferometer delay.
struct ModeLabel {
  ModeKind kind = ModeKind::kPhotonic;
  std::string port;
  int bin = 0;

  auto operator<=>(const ModeLabel&) const = default;
  bool operator==(const ModeLabel&) const = default;

  bool is_emitter() const { return kind == ModeKind::kEmitter; }
  std::string str() const;
};

inline ModeLabel photonic(std::string port, int bin) {
  return ModeLabel{ModeKind::kPhotonic, std::move(port), bin};
}
inline ModeLabel emitter(std::string port, int bin) {
  return ModeLabel{ModeKind::kEmitter, std::move(port), bin};
}

/// Occupation numbers, one per basis mode. Ordering is by total count, then
/// reverse-lexicographic on the counts, so {00, 10, 01} enumerate in that order.
class Occupation {
 public:
  Occupation() = default;
  explicit Occupation(std::vector<std::uint8_t> counts);
  Occupation(std::initializer_list<int> counts);

  std::span<const std::uint8_t> counts() const { return counts_; }
  std::size_t size() const { return counts_.size(); }
  int operator[](std::size_t i) const { return counts_[i]; }
  int total() const { return total_; }

  Occupation with(std::size_t i, int count) const;

  bool operator==(const Occupation& o) const { return counts_ == o.counts_; }
  bool operator<(const Occupation& o) const;

  std::string str() const;

 private:
  std::vector<std::uint8_t> counts_;
  int total_ = 0;
};

struct OccupationHash {
  std::size_t operator()(const Occupation& occ) const noexcept;
};

/// Ordered list of modes with a total-photon truncation. Emitter ancillas hold
/// 0 or 1 excitations and do not count against the truncation.
class FockBasis {
 public:
  FockBasis(std::vector<ModeLabel> modes, int n_max);

  const std::vector<ModeLabel>& modes() const { return modes_; }
  std::size_t mode_count() const { return modes_.size(); }
  int n_max() const { return n_max_; }

  std::optional<std::size_t> find(const ModeLabel& label) const;
  /// Throws std::invalid_argument for labels not in the basis.
  std::size_t index_of(const ModeLabel& label) const;
  bool is_emitter(std::size_t i) const { return modes_[i].is_emitter(); }

  int photons(const Occupation& occ) const;
  /// All admissible occupations in the canonical order.
  std::vector<Occupation> enumerate() const;

 private:
  std::vector<ModeLabel> modes_;
  std::map<ModeLabel, std::size_t> index_;
  int n_max_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

BasisPtr make_basis(std::vector<ModeLabel> modes, int n_max);

/// Sparse pure state over a FockBasis. Immutable; operations return new states.
class FockState {
 public:
  using Terms = std::map<Occupation, Complex>;

  FockState(BasisPtr basis, Terms terms, bool post_selected = false);

  static FockState vacuum(BasisPtr basis);
  static FockState from_occupation(BasisPtr basis, const Occupation& occ);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const Terms& terms() const { return terms_; }
  bool post_selected() const { return post_selected_; }

  Complex amplitude(const Occupation& occ) const;
  double norm_squared() const;
  FockState normalized() const;
  FockState scaled(Complex factor) const;

  /// Mean occupation of one mode.
  double mean_number(std::size_t mode) const;
  /// Product state on the concatenated basis (this modes first).
  FockState tensor(const FockState& other, int n_max) const;

  /// [{occupation: [...], re, im}, ...] in canonical term order.
  nlohmann::json to_json() const;

 private:
  BasisPtr basis_;
  Terms terms_;
  bool post_selected_;
};

/// Linear combination of mode annihilators, sum_j c_j a_j.
using LoweringOperator = std::vector<std::pair<std::size_t, Complex>>;

/// Applies a lowering operator; the result is flagged sub-normalized.
FockState apply_lowering(const FockState& state, const LoweringOperator& op);

/// Returns the renormalized conditional state and the selection probability.
/// Throws EmptySelectionError when no term matches.
std::pair<FockState, double> postselect(const FockState& state,
                                        const std::function<bool(const Occupation&)>& predicate);

/// Threshold-detector probability: every `true` mode holds at least one
/// photon and every `false` mode none; other modes and ancillas are traced.
double detection_probability(const FockState& state, const std::map<ModeLabel, bool>& pattern);

/// <:n_i n_j:> from the Fock expansion (n_i (n_i - 1) when i == j).
double intensity_correlation(const FockState& state, std::size_t i, std::size_t j);

/// Reduced density matrix of a single mode, dimension (max occupation + 1).
Eigen::MatrixXcd reduced_density_matrix(const FockState& state, std::size_t mode);

}  // namespace franson::fock
