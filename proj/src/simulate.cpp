#include "lwct/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lwct/error.hpp"

namespace lwct {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Parameter interval of the line inside the slab |p - c| <= half along one axis.
bool clip_slab(double origin, double dir, double center, double half, double& t0, double& t1) {
  const double o = origin - center;
  if (dir == 0.0) return std::abs(o) <= half;
  double a = (-half - o) / dir;
  double b = (half - o) / dir;
  if (a > b) std::swap(a, b);
  t0 = std::max(t0, a);
  t1 = std::min(t1, b);
  return t0 < t1;
}

}  // namespace

double intersection_length(const Shape& shape, const Vec3& origin, const Vec3& dir) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          const Vec3 o{origin[0] - s.center[0], origin[1] - s.center[1], origin[2] - s.center[2]};
          const double b = o[0] * dir[0] + o[1] * dir[1] + o[2] * dir[2];
          const double c = o[0] * o[0] + o[1] * o[1] + o[2] * o[2] - s.radius * s.radius;
          const double disc = b * b - c;
          return disc > 0.0 ? 2.0 * std::sqrt(disc) : 0.0;
        } else if constexpr (std::is_same_v<T, Box>) {
          double t0 = -kInf, t1 = kInf;
          for (int axis = 0; axis < 3; ++axis)
            if (!clip_slab(origin[axis], dir[axis], s.center[axis], 0.5 * s.size[axis], t0, t1))
              return 0.0;
          return t1 - t0;
        } else {
          double t0 = -kInf, t1 = kInf;
          if (!clip_slab(origin[2], dir[2], s.center[2], 0.5 * s.height, t0, t1)) return 0.0;
          const double ox = origin[0] - s.center[0];
          const double oy = origin[1] - s.center[1];
          const double a = dir[0] * dir[0] + dir[1] * dir[1];
          if (a == 0.0) {
            if (ox * ox + oy * oy > s.radius * s.radius) return 0.0;
          } else {
            const double b = ox * dir[0] + oy * dir[1];
            const double c = ox * ox + oy * oy - s.radius * s.radius;
            const double disc = b * b - a * c;
            if (disc <= 0.0) return 0.0;
            const double root = std::sqrt(disc);
            t0 = std::max(t0, (-b - root) / a);
            t1 = std::min(t1, (-b + root) / a);
          }
          return t1 > t0 ? t1 - t0 : 0.0;
        }
      },
      shape);
}

Volume voxelize(const Phantom& phantom, const VolumeGrid& grid) {
  grid.validate();
  Array3<float> data(grid.nz, grid.ny, grid.nx, 0.0f);
  if (!phantom.empty()) {
    for (std::size_t k = 0; k < grid.nz; ++k)
      for (std::size_t j = 0; j < grid.ny; ++j)
        for (std::size_t i = 0; i < grid.nx; ++i)
          data(k, j, i) = static_cast<float>(phantom.density_at({grid.x(i), grid.y(j), grid.z(k)}));
  }
  return Volume(grid, std::move(data));
}

ProjectionStack forward_project(const Phantom& phantom, const ScanGeometry& g) {
  Array3<float> data(g.views(), g.rows(), g.cols(), 0.0f);
  if (!phantom.empty()) {
    const double R = g.source_to_axis();
    const auto n_views = static_cast<std::ptrdiff_t>(g.views());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < n_views; ++v) {
      const double beta = g.angles()[static_cast<std::size_t>(v)];
      const double c = std::cos(beta), s = std::sin(beta);
      const Vec3 source{-R * c, -R * s, 0.0};
      for (std::size_t row = 0; row < g.rows(); ++row) {
        const double b = g.row_coord(row);
        for (std::size_t col = 0; col < g.cols(); ++col) {
          const double a = g.col_coord(col);
          // Pixel center on the virtual detector: a * (-sin, cos, 0) + b * z.
          Vec3 dir{-a * s - source[0], a * c - source[1], b - source[2]};
          const double len = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
          for (auto& d : dir) d /= len;
          double sum = 0.0;
          for (const auto& p : phantom.primitives())
            sum += p.density * intersection_length(p.shape, source, dir);
          data(static_cast<std::size_t>(v), row, col) = static_cast<float>(sum);
        }
      }
    }
  }
  return ProjectionStack(g, std::move(data));
}

ProjectionStack add_noise(const ProjectionStack& stack, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DataError("add_noise: sigma must be >= 0");
  if (sigma == 0.0) return stack;
  Array3<float> data = stack.data();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& px : data.flat()) px = static_cast<float>(static_cast<double>(px) + noise(rng));
  return ProjectionStack(stack.geometry(), std::move(data));
}

}  // namespace lwct
