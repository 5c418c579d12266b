#pragma once

#include <complex>

#include <Eigen/Dense>

namespace franson::fock {

/// Ryser's formula with Gray-code subset updates, O(2^n n).
/// The permanent of a 0x0 matrix is 1.
std::complex<double> permanent(const Eigen::MatrixXcd& a);

/// Direct sum over all n! permutations. Test oracle for small matrices only.
std::complex<double> permanent_bruteforce(const Eigen::MatrixXcd& a);

}  // namespace franson::fock
