#include "lwct/svd_codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lwct/error.hpp"
#include "lwct/svd.hpp"

namespace lwct {
namespace {

ThinSvd decompose_view(const ProjectionStack& stack, std::size_t view) {
  auto px = stack.view(view);
  std::vector<double> g(px.begin(), px.end());
  return thin_svd(g, stack.rows(), stack.cols());
}

void check_rank(std::size_t k, std::size_t m, std::size_t n) {
  if (k < 1 || k > std::min(m, n))
    throw DataError("svd: rank " + std::to_string(k) + " outside [1, " +
                    std::to_string(std::min(m, n)) + "]");
}

}  // namespace

void SvdView::validate() const {
  if (u.size() != m * k || v.size() != n * k || sigma.size() != k)
    throw DataError("svd view: factor sizes inconsistent with (m, n, k)");
  if (k > std::min(m, n)) throw DataError("svd view: k exceeds min(m, n)");
  for (std::size_t i = 0; i < k; ++i) {
    if (!(sigma[i] >= 0.0) || !std::isfinite(sigma[i]))
      throw DataError("svd view: singular values must be finite and >= 0");
    if (i > 0 && sigma[i] > sigma[i - 1])
      throw DataError("svd view: singular values must be non-increasing");
  }
}

void SvdScan::validate() const {
  if (views.size() != geometry.views())
    throw DataError("svd scan: view count does not match geometry");
  for (const auto& view : views) {
    view.validate();
    if (view.m != geometry.rows() || view.n != geometry.cols() || view.k != rank)
      throw DataError("svd scan: view dimensions do not match geometry/rank");
  }
}

SvdScan svd_encode(const ProjectionStack& stack, std::size_t k) {
  const std::size_t m = stack.rows(), n = stack.cols();
  check_rank(k, m, n);
  SvdScan scan{stack.geometry(), k, std::vector<SvdView>(stack.views())};
  const auto n_views = static_cast<std::ptrdiff_t>(stack.views());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t vi = 0; vi < n_views; ++vi) {
    const ThinSvd full = decompose_view(stack, static_cast<std::size_t>(vi));
    SvdView& out = scan.views[static_cast<std::size_t>(vi)];
    out.m = m;
    out.n = n;
    out.k = k;
    out.u.assign(full.u.begin(), full.u.begin() + static_cast<std::ptrdiff_t>(m * k));
    out.sigma.assign(full.sigma.begin(), full.sigma.begin() + static_cast<std::ptrdiff_t>(k));
    out.v.assign(full.v.begin(), full.v.begin() + static_cast<std::ptrdiff_t>(n * k));
  }
  return scan;
}

std::vector<double> expand_view(const SvdView& view) {
  view.validate();
  const std::size_t m = view.m, n = view.n;
  std::vector<double> acc(m * n, 0.0);
  for (std::size_t i = 0; i < view.k; ++i) {
    const double s = view.sigma[i];
    const double* u = view.u.data() + i * m;
    const double* v = view.v.data() + i * n;
    for (std::size_t r = 0; r < m; ++r) {
      const double su = s * u[r];
      double* row = acc.data() + r * n;
      for (std::size_t c = 0; c < n; ++c) row[c] += su * v[c];
    }
  }
  return acc;
}

ProjectionStack svd_decode(const SvdScan& scan) {
  scan.validate();
  const std::size_t m = scan.geometry.rows(), n = scan.geometry.cols();
  Array3<float> data(scan.views.size(), m, n);
  const auto n_views = static_cast<std::ptrdiff_t>(scan.views.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t vi = 0; vi < n_views; ++vi) {
    const auto acc = expand_view(scan.views[static_cast<std::size_t>(vi)]);
    auto plane = data.plane(static_cast<std::size_t>(vi));
    for (std::size_t p = 0; p < m * n; ++p) plane[p] = static_cast<float>(acc[p]);
  }
  return ProjectionStack(scan.geometry, std::move(data));
}

std::vector<std::vector<double>> view_spectra(const ProjectionStack& stack) {
  std::vector<std::vector<double>> spectra(stack.views());
  const auto n_views = static_cast<std::ptrdiff_t>(stack.views());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t vi = 0; vi < n_views; ++vi)
    spectra[static_cast<std::size_t>(vi)] = decompose_view(stack, static_cast<std::size_t>(vi)).sigma;
  return spectra;
}

double truncation_mse(const std::vector<double>& spectrum, std::size_t k, std::size_t m,
                      std::size_t n) {
  double tail = 0.0;
  // Smallest values first for an accurate sum.
  for (std::size_t i = spectrum.size(); i > k; --i) tail += spectrum[i - 1] * spectrum[i - 1];
  return tail / (static_cast<double>(m) * static_cast<double>(n));
}

std::size_t choose_rank(const std::vector<std::vector<double>>& spectra, std::size_t m,
                        std::size_t n, double mse_budget) {
  if (!(mse_budget > 0.0)) throw DataError("choose_rank: budget must be positive");
  if (spectra.empty()) throw DataError("choose_rank: no views");
  const std::size_t full = std::min(m, n);
  for (std::size_t k = 1; k <= full; ++k) {
    double worst = 0.0;
    for (const auto& s : spectra) worst = std::max(worst, truncation_mse(s, k, m, n));
    if (worst <= mse_budget) return k;
  }
  throw DataError("choose_rank: budget unachievable even at full rank");
}

std::size_t choose_rank(const ProjectionStack& stack, double mse_budget) {
  if (!(mse_budget > 0.0)) throw DataError("choose_rank: budget must be positive");
  return choose_rank(view_spectra(stack), stack.rows(), stack.cols(), mse_budget);
}

SvdScan quantize_factors(SvdScan scan) {
  for (auto& view : scan.views) {
    for (auto& x : view.u) x = static_cast<double>(static_cast<float>(x));
    for (auto& x : view.v) x = static_cast<double>(static_cast<float>(x));
  }
  return scan;
}

}  // namespace lwct
