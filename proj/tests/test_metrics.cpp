#include <doctest.h>

#include "lwct/error.hpp"
#include "lwct/metrics.hpp"
#include "lwct/svd_codec.hpp"
#include "support.hpp"

using namespace lwct;

namespace {

// Direct windowed SSIM: every valid window summed explicitly.
double ssim_oracle(const std::vector<float>& a, const std::vector<float>& b, std::size_t h,
                   std::size_t w) {
  const std::size_t n = 11;
  double g[11], gs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) - 5.0;
    g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    gs += g[i];
  }
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r + n <= h; ++r)
    for (std::size_t c = 0; c + n <= w; ++c) {
      double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
          const double wt = g[u] * g[v] / (gs * gs);
          const double x = a[(r + u) * w + c + v], y = b[(r + u) * w + c + v];
          mx += wt * x;
          my += wt * y;
          xx += wt * x * x;
          yy += wt * y * y;
          xy += wt * x * y;
        }
      const double vx = xx - mx * mx, vy = yy - my * my, cv = xy - mx * my;
      total += ((2 * mx * my + c1) * (2 * cv + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / static_cast<double>(count);
}

std::vector<float> random_image(std::size_t n, std::uint64_t seed, float lo, float hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> ud(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = ud(rng);
  return v;
}

}  // namespace

TEST_CASE("compression ratios") {
  CHECK(std::abs(cr_svd(2048, 1716, 30) - 31.11) <= 0.005);
  CHECK(cr_svd_exact(2048, 1716, 30) == Ratio::of(2048 * 1716, 30 * 3765));
  CHECK(std::abs(cr_total(2048, 1716, 30, 60) - 373.37) <= 0.01);
  CHECK(std::abs(cr_total_rounded(2048, 1716, 30, 60) - 373.32) < 1e-9);

  CHECK(cr_svd_exact(4, 3, 1) == Ratio{3, 2});
  CHECK(cr_svd(64, 64, 64) < 1.0);
  CHECK(cr_total_exact(64, 64, 64, 720) == cr_svd_exact(64, 64, 64));
  CHECK(cr_total_exact(100, 80, 5, 360) == cr_total_exact(100, 80, 5, 720) * Ratio{2, 1});

  CHECK_THROWS_AS(cr_svd(10, 10, 0), DataError);
  CHECK_THROWS_AS(cr_svd(10, 10, 11), DataError);
  CHECK_THROWS_AS(cr_total(10, 10, 1, 7), DataError);
}

TEST_CASE("storage in binary gigabytes") {
  CHECK(std::abs(binary_gb(storage_bytes(720, 2048, 1716)) - 9.4263) <= 1e-4);
  CHECK(std::abs(binary_gb(storage_bytes(60, 2048, 1716)) - 0.7855) <= 1e-4);
  CHECK(std::abs(binary_gb(svz_bytes(60, 2048, 1716, 30)) - 0.0252) <= 1e-4);
  CHECK(svz_bytes(60, 2048, 1716, 30) == 60ull * (30 * 2048 + 30 + 30 * 1716) * 4);

  const auto r = compression_report(2048, 1716, 30, 60);
  CHECK(r.cr_sparse == Ratio{12, 1});
  CHECK(r.cr_total == r.cr_svd * Ratio{12, 1});
  CHECK(r.bytes_raw == storage_bytes(720, 2048, 1716));
}

TEST_CASE("mse and psnr") {
  const auto a = random_image(1000, 1, -2, 2), b = random_image(1000, 2, -2, 2);
  CHECK(mse(a, a) == 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (static_cast<double>(a[i]) - b[i]) * (static_cast<double>(a[i]) - b[i]);
  CHECK(std::abs(mse(a, b) - s / 1000.0) <= 1e-12 * (s / 1000.0));
  const std::vector<float> zeros(50, 0.0f), ones(50, 1.0f);
  CHECK(mse(zeros, ones) == 1.0);
  CHECK(psnr(0.01, 1.0) == doctest::Approx(20.0));
  CHECK(std::isinf(psnr(0.0, 1.0)));
  CHECK_THROWS_AS(mse(a, zeros), DataError);
}

TEST_CASE("ssim") {
  const std::size_t h = 40, w = 33;
  const auto a = random_image(h * w, 5, 0, 1);
  CHECK(ssim(a, a, h, w) == doctest::Approx(1.0).epsilon(1e-12));

  const auto b = random_image(h * w, 6, 0, 1);
  std::vector<float> blend(h * w);
  for (std::size_t i = 0; i < blend.size(); ++i) blend[i] = 0.7f * a[i] + 0.3f * b[i];
  CHECK(std::abs(ssim(a, blend, h, w) - ssim_oracle(a, blend, h, w)) < 1e-10);

  std::vector<float> noisy(h * w);
  std::mt19937_64 rng(9);
  std::normal_distribution<float> nd(0.0f, 1.0f);
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] = a[i] + nd(rng);
  const double s_noisy = ssim(a, noisy, h, w);
  CHECK(s_noisy < 0.5);
  CHECK(std::abs(s_noisy - ssim_oracle(a, noisy, h, w)) < 1e-10);

  const std::vector<float> c0(h * w, 0.3f), c1(h * w, 0.6f);
  CHECK(ssim(c0, c1, h, w) < 1.0);
  CHECK(ssim(c0, c0, h, w) == doctest::Approx(1.0));
  CHECK_THROWS_AS(ssim(std::vector<float>(25), std::vector<float>(25), 5, 5), DataError);
}

TEST_CASE("compare volumes") {
  VolumeGrid grid{16, 12, 3, 1.0};
  Array3<float> ref(3, 12, 16), test(3, 12, 16);
  const auto r = random_image(ref.size(), 3, 0, 2);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ref.flat()[i] = r[i];
    test.flat()[i] = r[i] + (i % 2 ? 0.01f : -0.01f);
  }
  const auto q = compare(Volume(grid, test), Volume(grid, ref));
  CHECK(q.slices.size() == 3);
  CHECK(q.mse == doctest::Approx(1e-4).epsilon(1e-3));
  CHECK(q.ssim < 1.0);
  CHECK(q.ssim > 0.9);
  const auto same = compare(Volume(grid, ref), Volume(grid, ref));
  CHECK(same.mse == 0.0);
  CHECK(same.ssim == doctest::Approx(1.0));
}

TEST_CASE("mse curve") {
  const auto stack = test::random_stack(3, 12, 10, 17);
  const auto full = mse_curve(stack, {10});
  double energy = 0.0;
  for (float x : stack.data().flat()) energy += static_cast<double>(x) * x;
  CHECK(full[0].mse <= 1e-10 * energy);

  // Brute force: mean over views of ||G - expand(encode(G, k))||^2 / (m n).
  const std::vector<std::size_t> ks = {1, 2, 4, 7, 9};
  const auto curve = mse_curve(stack, ks);
  for (std::size_t idx = 0; idx < ks.size(); ++idx) {
    const auto scan = svd_encode(stack, ks[idx]);
    double total = 0.0;
    for (std::size_t v = 0; v < 3; ++v) {
      const auto g = expand_view(scan.views[v]);
      const auto ref = stack.view(v);
      double e = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) e += (g[i] - ref[i]) * (g[i] - ref[i]);
      total += e / 120.0;
    }
    CHECK(curve[idx].k == ks[idx]);
    CHECK(std::abs(curve[idx].mse - total / 3.0) <= 1e-8 * (total / 3.0) + 1e-15);
  }

  Array3<float> r2(2, 9, 7);
  const auto x = test::random_matrix(9, 2, 3), y = test::random_matrix(2, 7, 4);
  for (std::size_t v = 0; v < 2; ++v)
    for (std::size_t r = 0; r < 9; ++r)
      for (std::size_t c = 0; c < 7; ++c)
        r2(v, r, c) = static_cast<float>(x[r * 2] * y[c] - x[r * 2 + 1] * y[7 + c] * (2.0 + v));
  const auto c2 = mse_curve(ProjectionStack(make_circular_geometry(2, 9, 7, 1.0, 100.0), r2), {1, 2, 3, 7});
  CHECK(c2[0].mse > 1e-3);
  for (std::size_t i = 1; i < c2.size(); ++i) CHECK(c2[i].mse < 1e-12);

  CHECK_THROWS_AS(mse_curve(stack, {0}), DataError);
  CHECK_THROWS_AS(mse_curve(stack, {3, 2}), DataError);
  CHECK_THROWS_AS(mse_curve(stack, {11}), DataError);
}

TEST_CASE("plateau rank") {
  std::vector<CurvePoint> c;
  for (std::size_t k = 1; k <= 10; ++k) c.push_back({k, k < 4 ? 100.0 / static_cast<double>(k * k) : 5.0 - 0.1 * static_cast<double>(k)});
  CHECK(plateau_rank(c) == 4);
  std::vector<CurvePoint> steep;
  for (std::size_t k = 1; k <= 5; ++k) steep.push_back({k, 100.0 - 10.0 * static_cast<double>(k)});
  CHECK(plateau_rank(steep) == 0);
  CHECK(format_curve_csv({{1, 0.5}, {2, 0.25}}) == "k,mse\n1,0.5\n2,0.25\n");
}
