#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lwct/geometry.hpp"

namespace lwct {

// ---------------------------------------------------------------------------
// Compression accounting

// Exact non-negative rational, kept reduced.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Ratio of(std::uint64_t num, std::uint64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Ratio operator*(const Ratio& o) const;
  bool operator==(const Ratio&) const = default;
};

inline constexpr std::size_t kFullViews = 720;

// m n / (k (m + n + 1)); rank-k factors cost k (m + n + 1) values per view.
Ratio cr_svd_exact(std::size_t m, std::size_t n, std::size_t k);
double cr_svd(std::size_t m, std::size_t n, std::size_t k);

// cr_svd * full_views / views. views must divide full_views.
Ratio cr_total_exact(std::size_t m, std::size_t n, std::size_t k, std::size_t views,
                     std::size_t full_views = kFullViews);
double cr_total(std::size_t m, std::size_t n, std::size_t k, std::size_t views,
                std::size_t full_views = kFullViews);

// cr_svd rounded to two decimals, then multiplied by the sparse factor. This
// is how a 31.11 x 12 = 373.32 style figure arises; cr_total is the exact one.
double cr_total_rounded(std::size_t m, std::size_t n, std::size_t k, std::size_t views,
                        std::size_t full_views = kFullViews);

std::uint64_t storage_bytes(std::size_t views, std::size_t m, std::size_t n,
                            std::size_t bytes_per_px = 4);
// k (m + n + 1) values of 4 bytes per view.
std::uint64_t svz_bytes(std::size_t views, std::size_t m, std::size_t n, std::size_t k);
// Bytes / 2^30.
double binary_gb(std::uint64_t bytes);

struct CompressionReport {
  Ratio cr_svd;
  Ratio cr_sparse;
  Ratio cr_total;
  double cr_total_rounded = 0.0;
  std::uint64_t bytes_raw = 0;
  std::uint64_t bytes_sparse = 0;
  std::uint64_t bytes_compressed = 0;
};

CompressionReport compression_report(std::size_t m, std::size_t n, std::size_t k,
                                     std::size_t views, std::size_t full_views = kFullViews);

// ---------------------------------------------------------------------------
// Image quality

double mse(std::span<const float> a, std::span<const float> b);
double mse(const Volume& a, const Volume& b);
double mse(const ProjectionStack& a, const ProjectionStack& b);

// 10 log10(peak^2 / mse); +inf when mse is zero.
double psnr(double mse_value, double peak);

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
};

// Mean single-scale SSIM over all positions where the Gaussian window fits
// entirely inside the image. Images are row-major height x width.
double ssim(std::span<const float> a, std::span<const float> b, std::size_t height,
            std::size_t width, const SsimParams& params = {});

struct SliceQuality {
  double mse = 0.0;
  double psnr = 0.0;
  double ssim = 1.0;
};

struct QualityReport {
  double mse = 0.0;
  double psnr = 0.0;
  double ssim = 1.0;  // mean over z slices
  std::vector<SliceQuality> slices;
};

// Scores `test` against `reference`. Both volumes are normalized by the
// reference's [min, max] before SSIM; PSNR uses the reference range as peak.
QualityReport compare(const Volume& test, const Volume& reference);

// ---------------------------------------------------------------------------
// MSE versus retained rank

struct CurvePoint {
  std::size_t k = 0;
  double mse = 0.0;
};

// Mean over views of the rank-k truncation MSE, from singular values.
// ks must be ascending and within [1, min(rows, cols)].
std::vector<CurvePoint> mse_curve(const ProjectionStack& stack, const std::vector<std::size_t>& ks);
std::vector<CurvePoint> mse_curve(const std::vector<std::vector<double>>& spectra, std::size_t m,
                                  std::size_t n, const std::vector<std::size_t>& ks);

// First k after which every step changes the MSE by less than `tolerance`
// times MSE at the first point; 0 if the curve never settles.
std::size_t plateau_rank(const std::vector<CurvePoint>& curve, double tolerance = 0.01);

std::string format_curve_csv(const std::vector<CurvePoint>& curve);

}  // namespace lwct
