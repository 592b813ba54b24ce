#include <doctest.h>

#include "lwct/error.hpp"
#include "lwct/fdk.hpp"
#include "lwct/phantom.hpp"
#include "lwct/simulate.hpp"
#include "support.hpp"

using namespace lwct;

namespace {

// Spatial band-limited ramp kernel at integer offset n, sample spacing d.
double ram_lak(long n, double d) {
  if (n == 0) return 1.0 / (4.0 * d * d);
  if (n % 2 == 0) return 0.0;
  return -1.0 / (kPi * kPi * static_cast<double>(n) * static_cast<double>(n) * d * d);
}

// Response of the DC-free filter to a unit impulse at `at` on a circular
// grid of length len: d * (h(i - at) - mean(h)).
std::vector<double> impulse_oracle(std::size_t len, std::size_t at, double d) {
  std::vector<double> h(len);
  double mean = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    long n = static_cast<long>(i);
    if (n >= static_cast<long>(len / 2)) n -= static_cast<long>(len);
    h[i] = ram_lak(n, d);
    mean += h[i];
  }
  mean /= static_cast<double>(len);
  std::vector<double> out(len);
  for (std::size_t i = 0; i < len; ++i) out[(i + at) % len] = d * (h[i] - mean);
  return out;
}

ProjectionStack constant_stack(const ScanGeometry& g, float value) {
  Array3<float> data(g.views(), g.rows(), g.cols(), value);
  return ProjectionStack(g, std::move(data));
}

}  // namespace

TEST_CASE("cosine weight") {
  const double R = 2.0;
  const ScanGeometry g(R, 5, 5, 1.0, {0.0});
  const auto w = cosine_weight(constant_stack(g, 1.0f));
  CHECK(w.data()(0, 2, 2) == 1.0f);
  CHECK(w.data()(0, 4, 4) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-7));
  CHECK(w.data()(0, 0, 4) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-7));
  const ProjectionStack zero(g);
  CHECK(cosine_weight(zero) == zero);
}

TEST_CASE("ramp filter: DC, impulse, symmetry, linearity") {
  const std::size_t len = 256;
  const double d = 0.75;

  std::vector<double> flat(len, 3.0);
  ramp_filter_circular(flat, d, FilterWindow::None);
  for (double v : flat) CHECK(std::abs(v) <= 1e-4 * 3.0);

  std::vector<double> impulse(len, 0.0);
  impulse[100] = 1.0;
  auto filtered = impulse;
  ramp_filter_circular(filtered, d, FilterWindow::None);
  const auto expected = impulse_oracle(len, 100, d);
  for (std::size_t i = 0; i < len; ++i) CHECK(std::abs(filtered[i] - expected[i]) < 1e-6);
  for (std::size_t s = 1; s < len / 2; ++s)
    CHECK(std::abs(filtered[(100 + s) % len] - filtered[(100 + len - s) % len]) < 1e-6);

  auto hann = impulse;
  ramp_filter_circular(hann, d, FilterWindow::Hann);
  for (std::size_t s = 1; s < len / 2; ++s)
    CHECK(std::abs(hann[(100 + s) % len] - hann[(100 + len - s) % len]) < 1e-6);
  CHECK(hann[100] < filtered[100]);

  const auto p1 = test::random_matrix(1, len, 1), p2 = test::random_matrix(1, len, 2);
  const double alpha = 0.7, beta = -1.3;
  std::vector<double> mix(len);
  for (std::size_t i = 0; i < len; ++i) mix[i] = alpha * p1[i] + beta * p2[i];
  auto f1 = p1, f2 = p2;
  ramp_filter_circular(f1, d, FilterWindow::None);
  ramp_filter_circular(f2, d, FilterWindow::None);
  ramp_filter_circular(mix, d, FilterWindow::None);
  double err = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double ref = alpha * f1[i] + beta * f2[i];
    err += (mix[i] - ref) * (mix[i] - ref);
    norm += ref * ref;
  }
  CHECK(std::sqrt(err / norm) < 1e-6);

  std::vector<double> odd(100);
  CHECK_THROWS_AS(ramp_filter_circular(odd, d, FilterWindow::None), DataError);
}

TEST_CASE("row filtering uses linear convolution") {
  CHECK(ramp_padded_length(64) == 128);
  CHECK(ramp_padded_length(215) == 512);
  CHECK(ramp_padded_length(1) == 2);

  const ScanGeometry g(500.0, 2, 64, 0.5, {0.0});
  Array3<float> data(1, 2, 64, 0.0f);
  data(0, 1, 30) = 1.0f;
  const auto out = ramp_filter(ProjectionStack(g, data));
  const auto expected = impulse_oracle(128, 30, 0.5);
  for (std::size_t c = 0; c < 64; ++c) {
    CHECK(out.data()(0, 0, c) == 0.0f);
    CHECK(std::abs(out.data()(0, 1, c) - expected[c]) < 1e-5);
  }
}

TEST_CASE("backprojection weights against a direct sum") {
  const double R = 200.0;
  const auto g = make_circular_geometry(7, 64, 64, 1.0, R);
  const auto ones = constant_stack(g, 1.0f);
  const VolumeGrid grid{5, 4, 3, 2.0};
  for (FdkWeight weight : {FdkWeight::Standard, FdkWeight::Linear}) {
    const auto v = backproject(ones, grid, {FilterWindow::None, weight, 1});
    for (std::size_t k = 0; k < grid.nz; ++k)
      for (std::size_t j = 0; j < grid.ny; ++j)
        for (std::size_t i = 0; i < grid.nx; ++i) {
          double expected = 0.0;
          for (double beta : g.angles()) {
            const double U = R + grid.x(i) * std::cos(beta) + grid.y(j) * std::sin(beta);
            expected += (kPi / 7.0) * (weight == FdkWeight::Standard ? R * R / (U * U) : R * R / U);
          }
          CHECK(v.data()(k, j, i) == doctest::Approx(expected).epsilon(1e-6));
        }
  }
}

TEST_CASE("voxels projecting off the detector receive nothing") {
  const auto g = make_circular_geometry(1, 8, 8, 1.0, 100.0);
  const VolumeGrid grid{1, 41, 1, 1.0};
  const auto v = backproject(constant_stack(g, 1.0f), grid, {});
  // At beta = 0 the detector spans |a| <= 3.5 mm; y = +-20 mm lands far outside.
  CHECK(v.data()(0, 0, 0) == 0.0f);
  CHECK(v.data()(0, 20, 0) > 0.0f);
}

TEST_CASE("reconstruction: zero, power-of-two scaling, worker independence") {
  const auto g = make_circular_geometry(24, 32, 40, 1.0, 300.0);
  const VolumeGrid grid{16, 16, 12, 1.5};
  const ProjectionStack zero(g);
  const auto z = reconstruct(zero, grid);
  CHECK(std::all_of(z.data().flat().begin(), z.data().flat().end(), [](float x) { return x == 0.0f; }));

  const auto p = forward_project(builtin_phantom("sphere_box").scaled(0.05), g);
  Array3<float> doubled = p.data();
  for (auto& x : doubled.flat()) x *= 2.0f;
  const auto a = reconstruct(p, grid);
  const auto b = reconstruct(ProjectionStack(g, doubled), grid);
  for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(b.data().flat()[i] == 2.0f * a.data().flat()[i]);

  FdkOptions one, three;
  one.workers = 1;
  three.workers = 3;
  CHECK(reconstruct(p, grid, one) == reconstruct(p, grid, three));
}

TEST_CASE("sphere reconstruction at reduced scale") {
  const auto g = make_circular_geometry(240, 96, 96, 1.0, 600.0);
  const auto p = forward_project(builtin_phantom("sphere"), g);
  const VolumeGrid grid{64, 64, 64, 1.0};
  const auto v = reconstruct(p, grid);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < 64; ++k)
    for (std::size_t j = 0; j < 64; ++j)
      for (std::size_t i = 0; i < 64; ++i) {
        const double r2 = grid.x(i) * grid.x(i) + grid.y(j) * grid.y(j) + grid.z(k) * grid.z(k);
        if (r2 < 15.0 * 15.0) {
          sum += v.data()(k, j, i);
          ++count;
        }
      }
  CHECK(sum / static_cast<double>(count) == doctest::Approx(1.0).epsilon(0.1));
}
