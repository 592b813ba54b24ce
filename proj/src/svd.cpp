#include "lwct/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lwct/error.hpp"

namespace lwct {
namespace {

double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

// In-place Golub-Reinsch for rows >= cols. On return `a` (rows x cols,
// row-major) holds the left singular vectors, w the unsorted singular values
// and v (cols x cols, row-major) the right singular vectors.
void golub_reinsch(std::vector<double>& a, std::size_t rows, std::size_t cols,
                   std::vector<double>& w, std::vector<double>& v) {
  const int m = static_cast<int>(rows);
  const int n = static_cast<int>(cols);
  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * cols + j]; };
  auto V = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(i) * cols + j]; };
  w.assign(cols, 0.0);
  v.assign(cols * cols, 0.0);
  std::vector<double> rv1(cols, 0.0);
  const double eps = std::numeric_limits<double>::epsilon();

  // Householder reduction to bidiagonal form.
  double g = 0.0, scale = 0.0, anorm = 0.0;
  int l = 0;
  for (int i = 0; i < n; ++i) {
    l = i + 1;
    rv1[i] = scale * g;
    g = 0.0;
    double s = 0.0;
    scale = 0.0;
    if (i < m) {
      for (int k = i; k < m; ++k) scale += std::abs(A(k, i));
      if (scale != 0.0) {
        for (int k = i; k < m; ++k) {
          A(k, i) /= scale;
          s += A(k, i) * A(k, i);
        }
        double f = A(i, i);
        g = -sign_of(std::sqrt(s), f);
        const double h = f * g - s;
        A(i, i) = f - g;
        for (int j = l; j < n; ++j) {
          s = 0.0;
          for (int k = i; k < m; ++k) s += A(k, i) * A(k, j);
          f = s / h;
          for (int k = i; k < m; ++k) A(k, j) += f * A(k, i);
        }
        for (int k = i; k < m; ++k) A(k, i) *= scale;
      }
    }
    w[i] = scale * g;
    g = 0.0;
    s = 0.0;
    scale = 0.0;
    if (i < m && i + 1 != n) {
      for (int k = l; k < n; ++k) scale += std::abs(A(i, k));
      if (scale != 0.0) {
        for (int k = l; k < n; ++k) {
          A(i, k) /= scale;
          s += A(i, k) * A(i, k);
        }
        const double f = A(i, l);
        g = -sign_of(std::sqrt(s), f);
        const double h = f * g - s;
        A(i, l) = f - g;
        for (int k = l; k < n; ++k) rv1[k] = A(i, k) / h;
        for (int j = l; j < m; ++j) {
          s = 0.0;
          for (int k = l; k < n; ++k) s += A(j, k) * A(i, k);
          for (int k = l; k < n; ++k) A(j, k) += s * rv1[k];
        }
        for (int k = l; k < n; ++k) A(i, k) *= scale;
      }
    }
    anorm = std::max(anorm, std::abs(w[i]) + std::abs(rv1[i]));
  }

  // Accumulate right-hand transformations.
  for (int i = n - 1; i >= 0; --i) {
    if (i < n - 1) {
      if (g != 0.0) {
        for (int j = l; j < n; ++j) V(j, i) = (A(i, j) / A(i, l)) / g;
        for (int j = l; j < n; ++j) {
          double s = 0.0;
          for (int k = l; k < n; ++k) s += A(i, k) * V(k, j);
          for (int k = l; k < n; ++k) V(k, j) += s * V(k, i);
        }
      }
      for (int j = l; j < n; ++j) V(i, j) = V(j, i) = 0.0;
    }
    V(i, i) = 1.0;
    g = rv1[i];
    l = i;
  }

  // Accumulate left-hand transformations.
  for (int i = std::min(m, n) - 1; i >= 0; --i) {
    l = i + 1;
    g = w[i];
    for (int j = l; j < n; ++j) A(i, j) = 0.0;
    if (g != 0.0) {
      g = 1.0 / g;
      for (int j = l; j < n; ++j) {
        double s = 0.0;
        for (int k = l; k < m; ++k) s += A(k, i) * A(k, j);
        const double f = (s / A(i, i)) * g;
        for (int k = i; k < m; ++k) A(k, j) += f * A(k, i);
      }
      for (int j = i; j < m; ++j) A(j, i) *= g;
    } else {
      for (int j = i; j < m; ++j) A(j, i) = 0.0;
    }
    A(i, i) += 1.0;
  }

  // Diagonalize the bidiagonal form with implicit-shift QR sweeps.
  constexpr int kMaxIterations = 75;
  for (int k = n - 1; k >= 0; --k) {
    for (int its = 0;; ++its) {
      bool cancel = true;
      int nm = 0;
      for (l = k; l >= 0; --l) {
        nm = l - 1;
        if (l == 0 || std::abs(rv1[l]) <= eps * anorm) {
          cancel = false;
          break;
        }
        if (std::abs(w[nm]) <= eps * anorm) break;
      }
      if (cancel) {
        double c = 0.0, s = 1.0;
        for (int i = l; i <= k; ++i) {
          double f = s * rv1[i];
          rv1[i] = c * rv1[i];
          if (std::abs(f) <= eps * anorm) break;
          g = w[i];
          double h = std::hypot(f, g);
          w[i] = h;
          h = 1.0 / h;
          c = g * h;
          s = -f * h;
          for (int j = 0; j < m; ++j) {
            const double y = A(j, nm);
            const double z = A(j, i);
            A(j, nm) = y * c + z * s;
            A(j, i) = z * c - y * s;
          }
        }
      }
      double z = w[k];
      if (l == k) {
        if (z < 0.0) {
          w[k] = -z;
          for (int j = 0; j < n; ++j) V(j, k) = -V(j, k);
        }
        break;
      }
      if (its >= kMaxIterations) throw DataError("svd: QR iteration did not converge");

      double x = w[l];
      nm = k - 1;
      double y = w[nm];
      g = rv1[nm];
      double h = rv1[k];
      double f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y);
      g = std::hypot(f, 1.0);
      f = ((x - z) * (x + z) + h * ((y / (f + sign_of(g, f))) - h)) / x;
      double c = 1.0, s = 1.0;
      for (int j = l; j <= nm; ++j) {
        const int i = j + 1;
        g = rv1[i];
        y = w[i];
        h = s * g;
        g = c * g;
        z = std::hypot(f, h);
        rv1[j] = z;
        c = f / z;
        s = h / z;
        f = x * c + g * s;
        g = g * c - x * s;
        h = y * s;
        y *= c;
        for (int jj = 0; jj < n; ++jj) {
          x = V(jj, j);
          z = V(jj, i);
          V(jj, j) = x * c + z * s;
          V(jj, i) = z * c - x * s;
        }
        z = std::hypot(f, h);
        w[j] = z;
        if (z != 0.0) {
          z = 1.0 / z;
          c = f * z;
          s = h * z;
        }
        f = c * g + s * y;
        x = c * y - s * g;
        for (int jj = 0; jj < m; ++jj) {
          y = A(jj, j);
          z = A(jj, i);
          A(jj, j) = y * c + z * s;
          A(jj, i) = z * c - y * s;
        }
      }
      rv1[l] = 0.0;
      rv1[k] = f;
      w[k] = x;
    }
  }
}

}  // namespace

ThinSvd thin_svd(std::span<const double> a, std::size_t m, std::size_t n) {
  if (a.size() != m * n) throw DataError("svd: matrix size mismatch");
  if (m == 0 || n == 0) throw DataError("svd: empty matrix");
  for (double x : a)
    if (!std::isfinite(x)) throw DataError("svd: non-finite matrix entry");

  // Work on the tall orientation; a wide matrix is decomposed as its transpose.
  const bool transposed = m < n;
  const std::size_t rows = transposed ? n : m;
  const std::size_t cols = transposed ? m : n;
  std::vector<double> work(rows * cols);
  if (transposed) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) work[j * cols + i] = a[i * n + j];
  } else {
    std::copy(a.begin(), a.end(), work.begin());
  }

  std::vector<double> w, vr;
  golub_reinsch(work, rows, cols, w, vr);

  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return w[x] > w[y]; });

  // Left vectors of the working matrix live in `work` (rows x cols), right
  // vectors in `vr` (cols x cols).
  ThinSvd out;
  out.m = m;
  out.n = n;
  const std::size_t p = cols;
  out.sigma.resize(p);
  out.u.assign(m * p, 0.0);
  out.v.assign(n * p, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    const std::size_t src = order[c];
    out.sigma[c] = w[src];
    for (std::size_t r = 0; r < rows; ++r) {
      const double left = work[r * cols + src];
      if (transposed)
        out.v[c * n + r] = left;
      else
        out.u[c * m + r] = left;
    }
    for (std::size_t r = 0; r < cols; ++r) {
      const double right = vr[r * cols + src];
      if (transposed)
        out.u[c * m + r] = right;
      else
        out.v[c * n + r] = right;
    }
    double* uc = out.u.data() + c * m;
    double* vc = out.v.data() + c * n;
    const auto first = std::find_if(uc, uc + m, [](double x) { return x != 0.0; });
    if (first != uc + m && *first < 0.0) {
      for (std::size_t r = 0; r < m; ++r) uc[r] = -uc[r];
      for (std::size_t r = 0; r < n; ++r) vc[r] = -vc[r];
    }
  }
  return out;
}

}  // namespace lwct
