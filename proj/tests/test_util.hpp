#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "franson/fock.hpp"

namespace franson::test {

inline std::vector<fock::ModeLabel> labels(const std::string& port, int n) {
  std::vector<fock::ModeLabel> out;
  for (int i = 0; i < n; ++i) out.push_back(fock::photonic(port + std::to_string(i), 0));
  return out;
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the R diagonal
/// phases folded back into Q.
inline Eigen::MatrixXcd haar_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd z(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) z(i, j) = {g(rng), g(rng)};
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return q;
}

}  // namespace franson::test
