#include "lwct/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lwct/error.hpp"
#include "lwct/keyvalue.hpp"
#include "lwct/svd_codec.hpp"

namespace lwct {

Ratio Ratio::of(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw DataError("ratio: zero denominator");
  const auto g = std::gcd(num, den);
  return g == 0 ? Ratio{0, 1} : Ratio{num / g, den / g};
}

Ratio Ratio::operator*(const Ratio& o) const {
  // Cross-reduce first to keep the products small.
  const auto g1 = std::gcd(num, o.den);
  const auto g2 = std::gcd(o.num, den);
  const auto a = g1 ? num / g1 : num, d = g1 ? o.den / g1 : o.den;
  const auto c = g2 ? o.num / g2 : o.num, b = g2 ? den / g2 : den;
  return Ratio::of(a * c, b * d);
}

Ratio cr_svd_exact(std::size_t m, std::size_t n, std::size_t k) {
  if (m == 0 || n == 0) throw DataError("cr_svd: dimensions must be positive");
  if (k < 1 || k > std::min(m, n))
    throw DataError("cr_svd: k=" + std::to_string(k) + " outside [1, " +
                    std::to_string(std::min(m, n)) + "]");
  return Ratio::of(std::uint64_t{m} * n, std::uint64_t{k} * (m + n + 1));
}

double cr_svd(std::size_t m, std::size_t n, std::size_t k) { return cr_svd_exact(m, n, k).value(); }

Ratio cr_total_exact(std::size_t m, std::size_t n, std::size_t k, std::size_t views,
                     std::size_t full_views) {
  if (views == 0 || full_views == 0 || full_views % views != 0)
    throw DataError("cr_total: views=" + std::to_string(views) + " must divide " +
                    std::to_string(full_views));
  return cr_svd_exact(m, n, k) * Ratio::of(full_views, views);
}

double cr_total(std::size_t m, std::size_t n, std::size_t k, std::size_t views,
                std::size_t full_views) {
  return cr_total_exact(m, n, k, views, full_views).value();
}

double cr_total_rounded(std::size_t m, std::size_t n, std::size_t k, std::size_t views,
                        std::size_t full_views) {
  cr_total_exact(m, n, k, views, full_views);  // validates arguments
  const Ratio sparse = Ratio::of(full_views, views);
  const double rounded_svd = std::round(cr_svd(m, n, k) * 100.0) / 100.0;
  return rounded_svd * sparse.value();
}

std::uint64_t storage_bytes(std::size_t views, std::size_t m, std::size_t n,
                            std::size_t bytes_per_px) {
  return std::uint64_t{views} * m * n * bytes_per_px;
}

std::uint64_t svz_bytes(std::size_t views, std::size_t m, std::size_t n, std::size_t k) {
  return std::uint64_t{views} * k * (m + n + 1) * 4;
}

double binary_gb(std::uint64_t bytes) { return static_cast<double>(bytes) / 1073741824.0; }

CompressionReport compression_report(std::size_t m, std::size_t n, std::size_t k,
                                     std::size_t views, std::size_t full_views) {
  CompressionReport r;
  r.cr_svd = cr_svd_exact(m, n, k);
  r.cr_total = cr_total_exact(m, n, k, views, full_views);
  r.cr_sparse = Ratio::of(full_views, views);
  r.cr_total_rounded = cr_total_rounded(m, n, k, views, full_views);
  r.bytes_raw = storage_bytes(full_views, m, n);
  r.bytes_sparse = storage_bytes(views, m, n);
  r.bytes_compressed = svz_bytes(views, m, n, k);
  return r;
}

double mse(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DataError("mse: shape mismatch");
  if (a.empty()) throw DataError("mse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

double mse(const Volume& a, const Volume& b) {
  if (a.data().extents() != b.data().extents()) throw DataError("mse: volume shape mismatch");
  return mse(a.data().flat(), b.data().flat());
}

double mse(const ProjectionStack& a, const ProjectionStack& b) {
  if (a.data().extents() != b.data().extents()) throw DataError("mse: stack shape mismatch");
  return mse(a.data().flat(), b.data().flat());
}

double psnr(double mse_value, double peak) {
  if (mse_value <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse_value);
}

namespace {

std::vector<double> gaussian_window(std::size_t size, double sigma) {
  std::vector<double> w(size);
  const double c = 0.5 * static_cast<double>(size - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - c;
    w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += w[i];
  }
  for (auto& x : w) x /= sum;
  return w;
}

// Separable "valid" filtering: output is (h - win + 1) x (w - win + 1).
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                 const std::vector<double>& win) {
  const std::size_t n = win.size();
  const std::size_t ow = w - n + 1, oh = h - n + 1;
  std::vector<double> tmp(h * ow, 0.0);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t t = 0; t < n; ++t) s += win[t] * img[r * w + c + t];
      tmp[r * ow + c] = s;
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t r = 0; r < oh; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t t = 0; t < n; ++t) s += win[t] * tmp[(r + t) * ow + c];
      out[r * ow + c] = s;
    }
  return out;
}

}  // namespace

double ssim(std::span<const float> a, std::span<const float> b, std::size_t height,
            std::size_t width, const SsimParams& p) {
  if (a.size() != b.size() || a.size() != height * width) throw DataError("ssim: shape mismatch");
  if (p.window == 0 || height < p.window || width < p.window)
    throw DataError("ssim: image smaller than the " + std::to_string(p.window) + "px window");
  const auto win = gaussian_window(p.window, p.sigma);
  const std::size_t n = a.size();
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = a[i];
    y[i] = b[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, height, width, win);
  const auto my = filter_valid(y, height, width, win);
  const auto sxx = filter_valid(xx, height, width, win);
  const auto syy = filter_valid(yy, height, width, win);
  const auto sxy = filter_valid(xy, height, width, win);

  const double c1 = (p.k1 * p.data_range) * (p.k1 * p.data_range);
  const double c2 = (p.k2 * p.data_range) * (p.k2 * p.data_range);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

QualityReport compare(const Volume& test, const Volume& reference) {
  if (test.data().extents() != reference.data().extents())
    throw DataError("compare: volume shape mismatch");
  const auto ref = reference.data().flat();
  const auto [lo, hi] = std::minmax_element(ref.begin(), ref.end());
  const double lo_v = *lo;
  const double range = *hi > *lo ? static_cast<double>(*hi) - lo_v : 1.0;

  QualityReport report;
  report.mse = mse(test, reference);
  report.psnr = psnr(report.mse, range);

  const std::size_t h = test.ny(), w = test.nx();
  const bool ssim_ok = h >= SsimParams{}.window && w >= SsimParams{}.window;
  std::vector<float> na(h * w), nb(h * w);
  double ssim_sum = 0.0;
  for (std::size_t z = 0; z < test.nz(); ++z) {
    const auto sa = test.slice(z), sb = reference.slice(z);
    SliceQuality q;
    q.mse = mse(sa, sb);
    q.psnr = psnr(q.mse, range);
    if (ssim_ok) {
      for (std::size_t i = 0; i < sa.size(); ++i) {
        na[i] = static_cast<float>((sa[i] - lo_v) / range);
        nb[i] = static_cast<float>((sb[i] - lo_v) / range);
      }
      q.ssim = ssim(na, nb, h, w);
    } else {
      q.ssim = q.mse == 0.0 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
    }
    ssim_sum += q.ssim;
    report.slices.push_back(q);
  }
  report.ssim = ssim_sum / static_cast<double>(test.nz());
  return report;
}

std::vector<CurvePoint> mse_curve(const std::vector<std::vector<double>>& spectra, std::size_t m,
                                  std::size_t n, const std::vector<std::size_t>& ks) {
  if (spectra.empty()) throw DataError("mse_curve: no views");
  const std::size_t full = std::min(m, n);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1 || ks[i] > full)
      throw DataError("mse_curve: k=" + std::to_string(ks[i]) + " outside [1, " +
                      std::to_string(full) + "]");
    if (i > 0 && ks[i] <= ks[i - 1]) throw DataError("mse_curve: ks must be ascending");
  }
  std::vector<CurvePoint> curve;
  curve.reserve(ks.size());
  for (std::size_t k : ks) {
    double sum = 0.0;
    for (const auto& s : spectra) sum += truncation_mse(s, k, m, n);
    curve.push_back({k, sum / static_cast<double>(spectra.size())});
  }
  return curve;
}

std::vector<CurvePoint> mse_curve(const ProjectionStack& stack, const std::vector<std::size_t>& ks) {
  return mse_curve(view_spectra(stack), stack.rows(), stack.cols(), ks);
}

std::size_t plateau_rank(const std::vector<CurvePoint>& curve, double tolerance) {
  if (curve.size() < 2) return 0;
  const double scale = curve.front().mse;
  if (scale <= 0.0) return curve.front().k;
  // Walk back from the end while every step stays below the tolerance.
  std::size_t start = curve.size() - 1;
  while (start > 0 &&
         std::abs(curve[start - 1].mse - curve[start].mse) < tolerance * scale)
    --start;
  return start == curve.size() - 1 ? 0 : curve[start].k;
}

std::string format_curve_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "k,mse\n";
  for (const auto& p : curve) out += std::to_string(p.k) + "," + format_double(p.mse) + "\n";
  return out;
}

}  // namespace lwct
