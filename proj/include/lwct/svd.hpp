#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lwct {

// Thin singular value decomposition A = U diag(sigma) V^T of an m x n matrix,
// p = min(m, n). U is m x p and V is n x p, both column-major; sigma is sorted
// non-increasing. Each u_i is sign-normalized so that its first nonzero
// component is positive, with v_i flipped to match.
struct ThinSvd {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> u;
  std::vector<double> sigma;
  std::vector<double> v;

  std::size_t rank_capacity() const { return sigma.size(); }
  double u_at(std::size_t row, std::size_t col) const { return u[col * m + row]; }
  double v_at(std::size_t row, std::size_t col) const { return v[col * n + row]; }
};

// Golub-Reinsch: Householder bidiagonalization followed by implicit-shift QR
// on the bidiagonal. `a` is row-major m x n. Throws DataError on non-finite
// input or if the QR sweep fails to converge.
ThinSvd thin_svd(std::span<const double> a, std::size_t m, std::size_t n);

}  // namespace lwct
