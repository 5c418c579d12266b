#include "franson/permanent.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace franson::fock {

std::complex<double> permanent(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("permanent needs a square matrix");
  const int n = static_cast<int>(a.rows());
  if (n == 0) return {1.0, 0.0};
  if (n > 30) throw std::invalid_argument("permanent: matrix too large");

  // Row sums over the current column subset.
  std::vector<std::complex<double>> row_sums(n, 0.0);
  std::complex<double> total = 0.0;
  std::uint64_t gray = 0;
  const std::uint64_t subsets = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    std::uint64_t next = k ^ (k >> 1);
    std::uint64_t diff = next ^ gray;
    int col = __builtin_ctzll(diff);
    double sign_add = (next & diff) ? 1.0 : -1.0;
    for (int i = 0; i < n; ++i) row_sums[i] += sign_add * a(i, col);
    gray = next;

    std::complex<double> prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= row_sums[i];
    int bits = __builtin_popcountll(gray);
    total += ((n - bits) % 2 == 0) ? prod : -prod;
  }
  return total;
}

std::complex<double> permanent_bruteforce(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("permanent needs a square matrix");
  const int n = static_cast<int>(a.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::complex<double> total = 0.0;
  do {
    std::complex<double> prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= a(i, perm[i]);
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

}  // namespace franson::fock
