#pragma once

#include <cstddef>
#include <vector>

#include "lwct/geometry.hpp"

namespace lwct {

// Rank-k factors of one projection view G (m rows x n cols):
// G ~ sum_i sigma_i u_i v_i^T. U and V are column-major and unscaled.
struct SvdView {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> u;      // m x k
  std::vector<double> sigma;  // k, non-increasing, >= 0
  std::vector<double> v;      // n x k

  // Throws DataError if shapes or singular-value ordering are inconsistent.
  void validate() const;
  bool operator==(const SvdView&) const = default;
};

struct SvdScan {
  ScanGeometry geometry;
  std::size_t rank = 0;
  std::vector<SvdView> views;

  void validate() const;
  bool operator==(const SvdScan&) const = default;
};

// Best rank-k approximation of every view (views are independent).
SvdScan svd_encode(const ProjectionStack& stack, std::size_t k);

// sum_i sigma_i u_i v_i^T of one view in double precision, row-major m x n.
std::vector<double> expand_view(const SvdView& view);

// Per-view sum_{i<=k} sigma_i u_i v_i^T.
ProjectionStack svd_decode(const SvdScan& scan);

// Full singular spectrum of each view, non-increasing.
std::vector<std::vector<double>> view_spectra(const ProjectionStack& stack);

// Per-view MSE of the rank-k truncation from its spectrum:
// sum_{i>k} sigma_i^2 / (m n).
double truncation_mse(const std::vector<double>& spectrum, std::size_t k, std::size_t m,
                      std::size_t n);

// Smallest k whose worst per-view truncation MSE is within budget.
std::size_t choose_rank(const ProjectionStack& stack, double mse_budget);
std::size_t choose_rank(const std::vector<std::vector<double>>& spectra, std::size_t m,
                        std::size_t n, double mse_budget);

// Rounds U and V to float32, the precision the SVZ container stores.
SvdScan quantize_factors(SvdScan scan);

}  // namespace lwct
