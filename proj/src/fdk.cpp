#include "lwct/fdk.hpp"

#include <fftw3.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

#include "lwct/error.hpp"

namespace lwct {
namespace {

// The FFTW planner is not re-entrant; plan execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <class T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter<T>>;

FftwBuffer<double> alloc_real(std::size_t n) { return FftwBuffer<double>(fftw_alloc_real(n)); }
FftwBuffer<fftw_complex> alloc_complex(std::size_t n) {
  return FftwBuffer<fftw_complex>(fftw_alloc_complex(n));
}

// Forward r2c and inverse c2r plans of one length.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    auto in = alloc_real(n);
    auto out = alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    const int len = static_cast<int>(n);
    forward_ = fftw_plan_dft_r2c_1d(len, in.get(), out.get(), FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(len, out.get(), in.get(), FFTW_ESTIMATE);
    if (!forward_ || !inverse_) throw DataError("fft: plan creation failed");
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  // Buffers must come from alloc_real/alloc_complex (FFTW alignment).
  void forward(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(forward_, in, out); }
  // Destroys the contents of `in`.
  void inverse(fftw_complex* in, double* out) const { fftw_execute_dft_c2r(inverse_, in, out); }

 private:
  std::size_t n_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

// Multiplies the spectrum of buf (length fft.size()) by response and
// transforms back, normalized.
void apply_response(const RealFft& fft, const std::vector<double>& response, double* buf,
                    fftw_complex* spec) {
  const std::size_t n = fft.size();
  fft.forward(buf, spec);
  for (std::size_t k = 0; k < response.size(); ++k) {
    spec[k][0] *= response[k];
    spec[k][1] *= response[k];
  }
  fft.inverse(spec, buf);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] *= inv_n;
}

}  // namespace

FilterWindow parse_filter_window(std::string_view name) {
  if (name == "none") return FilterWindow::None;
  if (name == "hann") return FilterWindow::Hann;
  throw DataError("unknown filter window '" + std::string(name) + "' (none|hann)");
}

FdkWeight parse_fdk_weight(std::string_view name) {
  if (name == "standard") return FdkWeight::Standard;
  if (name == "linear") return FdkWeight::Linear;
  throw DataError("unknown fdk weight '" + std::string(name) + "' (standard|linear)");
}

std::string_view to_string(FilterWindow w) { return w == FilterWindow::Hann ? "hann" : "none"; }
std::string_view to_string(FdkWeight w) { return w == FdkWeight::Linear ? "linear" : "standard"; }

ProjectionStack cosine_weight(const ProjectionStack& stack) {
  const auto& g = stack.geometry();
  const double R = g.source_to_axis();
  std::vector<double> factor(g.rows() * g.cols());
  for (std::size_t r = 0; r < g.rows(); ++r) {
    const double b = g.row_coord(r);
    for (std::size_t c = 0; c < g.cols(); ++c) {
      const double a = g.col_coord(c);
      factor[r * g.cols() + c] = R / std::sqrt(R * R + a * a + b * b);
    }
  }
  Array3<float> data = stack.data();
  for (std::size_t v = 0; v < stack.views(); ++v) {
    auto plane = data.plane(v);
    for (std::size_t p = 0; p < plane.size(); ++p)
      plane[p] = static_cast<float>(static_cast<double>(plane[p]) * factor[p]);
  }
  return ProjectionStack(g, std::move(data));
}

std::size_t ramp_padded_length(std::size_t cols) {
  std::size_t p = 1;
  while (p < cols) p <<= 1;
  return 2 * p;
}

std::vector<double> ramp_response(std::size_t padded, double spacing, FilterWindow window) {
  if (padded < 2 || (padded & (padded - 1)) != 0)
    throw DataError("ramp filter: padded length must be a power of two");
  const RealFft fft(padded);
  auto kernel = alloc_real(padded);
  auto spec = alloc_complex(padded / 2 + 1);

  // Band-limited Ram-Lak kernel on the circular grid: h(0) = 1/(4 d^2),
  // h(n) = -1/(pi n d)^2 for odd n, 0 for even n != 0.
  const double d2 = spacing * spacing;
  for (std::size_t i = 0; i < padded; ++i) {
    const auto n = i < padded / 2 ? static_cast<std::ptrdiff_t>(i)
                                  : static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(padded);
    if (n == 0)
      kernel[i] = 1.0 / (4.0 * d2);
    else if (n % 2 != 0)
      kernel[i] = -1.0 / (kPi * kPi * static_cast<double>(n * n) * d2);
    else
      kernel[i] = 0.0;
  }
  fft.forward(kernel.get(), spec.get());

  std::vector<double> response(padded / 2 + 1);
  for (std::size_t k = 0; k < response.size(); ++k) {
    double h = spec[k][0] * spacing;
    if (window == FilterWindow::Hann)
      h *= 0.5 * (1.0 + std::cos(kPi * static_cast<double>(k) / static_cast<double>(padded / 2)));
    response[k] = h;
  }
  response[0] = 0.0;
  return response;
}

void ramp_filter_circular(std::span<double> buffer, double spacing, FilterWindow window) {
  const auto response = ramp_response(buffer.size(), spacing, window);
  const RealFft fft(buffer.size());
  auto buf = alloc_real(buffer.size());
  auto spec = alloc_complex(buffer.size() / 2 + 1);
  std::copy(buffer.begin(), buffer.end(), buf.get());
  apply_response(fft, response, buf.get(), spec.get());
  std::copy(buf.get(), buf.get() + buffer.size(), buffer.begin());
}

ProjectionStack ramp_filter(const ProjectionStack& stack, FilterWindow window) {
  const auto& g = stack.geometry();
  const std::size_t cols = g.cols();
  const std::size_t padded = ramp_padded_length(cols);
  const auto response = ramp_response(padded, g.pixel_pitch(), window);
  const RealFft fft(padded);

  Array3<float> data(stack.views(), stack.rows(), cols);
  const auto n_lines = static_cast<std::ptrdiff_t>(stack.views() * stack.rows());
  const auto& src = stack.data().flat();
  auto dst = data.flat();
#pragma omp parallel
  {
    auto buf = alloc_real(padded);
    auto spec = alloc_complex(padded / 2 + 1);
#pragma omp for schedule(static)
    for (std::ptrdiff_t line = 0; line < n_lines; ++line) {
      const std::size_t offset = static_cast<std::size_t>(line) * cols;
      for (std::size_t i = 0; i < cols; ++i) buf[i] = src[offset + i];
      std::fill(buf.get() + cols, buf.get() + padded, 0.0);
      apply_response(fft, response, buf.get(), spec.get());
      for (std::size_t i = 0; i < cols; ++i) dst[offset + i] = static_cast<float>(buf[i]);
    }
  }
  return ProjectionStack(g, std::move(data));
}

Volume backproject(const ProjectionStack& filtered, const VolumeGrid& grid,
                   const FdkOptions& options) {
  grid.validate();
  const auto& g = filtered.geometry();
  const std::size_t n_views = g.views();
  const std::size_t rows = g.rows(), cols = g.cols();
  const double R = g.source_to_axis();
  const double pitch = g.pixel_pitch();
  const double scale = 0.5 * kTwoPi / static_cast<double>(n_views);

  std::vector<double> cos_b(n_views), sin_b(n_views);
  for (std::size_t v = 0; v < n_views; ++v) {
    cos_b[v] = std::cos(g.angles()[v]);
    sin_b[v] = std::sin(g.angles()[v]);
  }

  // Detector columns made contiguous along rows, so the z loop walks memory.
  std::vector<float> columns(n_views * cols * rows);
  for (std::size_t v = 0; v < n_views; ++v) {
    auto plane = filtered.view(v);
    float* dst = columns.data() + v * cols * rows;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = plane[r * cols + c];
  }

  const double col_center = 0.5 * static_cast<double>(cols - 1);
  const double row_center = 0.5 * static_cast<double>(rows - 1);
  const double max_col = static_cast<double>(cols - 1);
  const double max_row = static_cast<double>(rows - 1);
  const bool standard = options.weight == FdkWeight::Standard;

  Array3<float> out(grid.nz, grid.ny, grid.nx, 0.0f);
  const auto ny = static_cast<std::ptrdiff_t>(grid.ny);
  const int workers = options.workers > 0 ? options.workers : omp_get_max_threads();

#pragma omp parallel num_threads(workers)
  {
    std::vector<double> acc(grid.nz);
#pragma omp for schedule(static)
    for (std::ptrdiff_t jy = 0; jy < ny; ++jy) {
      const auto j = static_cast<std::size_t>(jy);
      const double y = grid.y(j);
      for (std::size_t i = 0; i < grid.nx; ++i) {
        const double x = grid.x(i);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t v = 0; v < n_views; ++v) {
          const double U = R + x * cos_b[v] + y * sin_b[v];
          if (U <= 0.0) continue;
          const double mag = R / U;
          const double a = mag * (-x * sin_b[v] + y * cos_b[v]);
          const double colf = (a - g.offset_col()) / pitch + col_center;
          if (!(colf >= 0.0 && colf <= max_col)) continue;
          const auto c0 = static_cast<std::size_t>(colf);
          const std::size_t c1 = std::min(c0 + 1, cols - 1);
          const double fc = colf - static_cast<double>(c0);
          const double w = scale * (standard ? mag * mag : R * R / U);
          const float* col0 = columns.data() + (v * cols + c0) * rows;
          const float* col1 = columns.data() + (v * cols + c1) * rows;

          const double row0 = (mag * grid.z(0) - g.offset_row()) / pitch + row_center;
          const double drow = mag * grid.voxel_pitch / pitch;
          for (std::size_t k = 0; k < grid.nz; ++k) {
            const double rowf = row0 + drow * static_cast<double>(k);
            if (!(rowf >= 0.0 && rowf <= max_row)) continue;
            const auto r0 = static_cast<std::size_t>(rowf);
            const std::size_t r1 = std::min(r0 + 1, rows - 1);
            const double fr = rowf - static_cast<double>(r0);
            const double left = (1.0 - fr) * col0[r0] + fr * col0[r1];
            const double right = (1.0 - fr) * col1[r0] + fr * col1[r1];
            acc[k] += w * ((1.0 - fc) * left + fc * right);
          }
        }
        for (std::size_t k = 0; k < grid.nz; ++k) out(k, j, i) = static_cast<float>(acc[k]);
      }
    }
  }
  return Volume(grid, std::move(out));
}

Volume reconstruct(const ProjectionStack& stack, const VolumeGrid& grid,
                   const FdkOptions& options) {
  return backproject(ramp_filter(cosine_weight(stack), options.window), grid, options);
}

}  // namespace lwct
