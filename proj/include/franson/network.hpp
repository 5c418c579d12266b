#pragma once

#include <vector>

#include <Eigen/Dense>

#include "franson/fock.hpp"

namespace franson::fock {

/// Unitary map between two equally sized lists of photonic modes.
/// matrix(k, j) is the amplitude for input mode j to exit in output mode k,
/// i.e. a_j^dagger -> sum_k U(k, j) b_k^dagger.
class ModeNetwork {
 public:
  /// Two-mode rotation acting on positions (p, q) with 2x2 block `block`.
  struct Rotation {
    std::size_t p;
    std::size_t q;
    Eigen::Matrix2cd block;
  };

  /// Validates shape, label uniqueness, photonic-only labels, unitarity
  /// (max |U^dag U - I| < 1e-12) and, when `causal`, that nonzero entries never
  /// move a mode to an earlier time bin.
  ModeNetwork(std::vector<ModeLabel> inputs, std::vector<ModeLabel> outputs, Eigen::MatrixXcd matrix,
              bool causal = true);

  static ModeNetwork identity(const std::vector<ModeLabel>& labels);
  /// Block-diagonal combination of two networks acting on disjoint modes.
  static ModeNetwork parallel(const ModeNetwork& a, const ModeNetwork& b);

  const std::vector<ModeLabel>& inputs() const { return inputs_; }
  const std::vector<ModeLabel>& outputs() const { return outputs_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  std::size_t size() const { return inputs_.size(); }
  bool causal() const { return causal_; }

  std::optional<std::size_t> input_index(const ModeLabel& label) const;
  std::optional<std::size_t> output_index(const ModeLabel& label) const;
  Complex amplitude(const ModeLabel& out, const ModeLabel& in) const;

  double unitarity_error() const;

  /// This network followed by `next`. Outputs of this network that `next`
  /// takes as inputs are connected; everything else passes straight through.
  ModeNetwork then(const ModeNetwork& next) const;
  /// Inverse network (outputs become inputs). Not causal.
  ModeNetwork adjoint() const;

  /// U = R_1 R_2 ... R_K D with the rotations listed in that order.
  const std::vector<Rotation>& rotations() const { return rotations_; }
  const Eigen::VectorXcd& phases() const { return phases_; }

 private:
  void decompose();

  std::vector<ModeLabel> inputs_;
  std::vector<ModeLabel> outputs_;
  std::map<ModeLabel, std::size_t> in_index_;
  std::map<ModeLabel, std::size_t> out_index_;
  Eigen::MatrixXcd matrix_;
  bool causal_;
  std::vector<Rotation> rotations_;
  Eigen::VectorXcd phases_;
};

/// Evolves a state through the multi-photon lift of the network. The state's
/// photonic modes must be network inputs; ancillas pass through unchanged.
/// The output basis is (network outputs..., ancillas...) with the same n_max.
FockState apply_network(const FockState& state, const ModeNetwork& net);

/// <out|U|in> computed as perm(U_sub) / sqrt(prod in! prod out!) with a Ryser
/// permanent. `in` is indexed like net.inputs(), `out` like net.outputs().
/// Throws std::invalid_argument when the photon numbers differ.
Complex amplitude_oracle(const ModeNetwork& net, const Occupation& in, const Occupation& out);

}  // namespace franson::fock
