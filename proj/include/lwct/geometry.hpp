#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lwct/array3.hpp"

namespace lwct {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Circular cone-beam acquisition.
//
// Conventions: the rotation axis is z and the source orbits counterclockwise
// at distance source_to_axis. At view angle beta the source sits at
// -R (cos beta, sin beta, 0) and the central ray points along
// (cos beta, sin beta, 0). Detector coordinates (a, b) live on a virtual
// detector plane through the rotation axis, in mm, with a along
// (-sin beta, cos beta, 0) and b along z. Pixel pitch is therefore the
// demagnified pitch.
class ScanGeometry {
 public:
  ScanGeometry(double source_to_axis, std::size_t rows, std::size_t cols,
               double pixel_pitch, std::vector<double> angles,
               double offset_row = 0.0, double offset_col = 0.0);

  double source_to_axis() const { return source_to_axis_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double pixel_pitch() const { return pixel_pitch_; }
  const std::vector<double>& angles() const { return angles_; }
  std::size_t views() const { return angles_.size(); }
  double offset_row() const { return offset_row_; }
  double offset_col() const { return offset_col_; }

  // Virtual-detector coordinate of a pixel center, mm.
  double col_coord(std::size_t col) const {
    return (static_cast<double>(col) - 0.5 * static_cast<double>(cols_ - 1)) * pixel_pitch_ +
           offset_col_;
  }
  double row_coord(std::size_t row) const {
    return (static_cast<double>(row) - 0.5 * static_cast<double>(rows_ - 1)) * pixel_pitch_ +
           offset_row_;
  }

  ScanGeometry with_angles(std::vector<double> angles) const;

  bool operator==(const ScanGeometry&) const = default;

 private:
  double source_to_axis_;
  std::size_t rows_;
  std::size_t cols_;
  double pixel_pitch_;
  std::vector<double> angles_;
  double offset_row_;
  double offset_col_;
};

// Equally spaced full-circle geometry, beta_i = 2 pi i / n_views.
ScanGeometry make_circular_geometry(std::size_t n_views, std::size_t rows, std::size_t cols,
                                    double pitch, double source_to_axis);

// Projection data indexed (view, row, col), line integrals of attenuation.
class ProjectionStack {
 public:
  ProjectionStack(ScanGeometry geometry, Array3<float> data);

  // Zero-filled stack matching the geometry.
  explicit ProjectionStack(ScanGeometry geometry);

  const ScanGeometry& geometry() const { return geometry_; }
  const Array3<float>& data() const { return data_; }
  std::size_t views() const { return data_.extent(0); }
  std::size_t rows() const { return data_.extent(1); }
  std::size_t cols() const { return data_.extent(2); }
  std::span<const float> view(std::size_t i) const { return data_.plane(i); }

  bool operator==(const ProjectionStack&) const = default;

 private:
  ScanGeometry geometry_;
  Array3<float> data_;
};

// Reconstruction grid centered on the rotation axis.
struct VolumeGrid {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;
  double voxel_pitch = 1.0;

  void validate() const;
  double x(std::size_t i) const { return (static_cast<double>(i) - 0.5 * static_cast<double>(nx - 1)) * voxel_pitch; }
  double y(std::size_t j) const { return (static_cast<double>(j) - 0.5 * static_cast<double>(ny - 1)) * voxel_pitch; }
  double z(std::size_t k) const { return (static_cast<double>(k) - 0.5 * static_cast<double>(nz - 1)) * voxel_pitch; }
  bool operator==(const VolumeGrid&) const = default;
};

// Reconstructed attenuation, stored (z, y, x).
class Volume {
 public:
  Volume(VolumeGrid grid, Array3<float> data);
  explicit Volume(VolumeGrid grid);

  const VolumeGrid& grid() const { return grid_; }
  const Array3<float>& data() const { return data_; }
  std::size_t nx() const { return grid_.nx; }
  std::size_t ny() const { return grid_.ny; }
  std::size_t nz() const { return grid_.nz; }
  double voxel_pitch() const { return grid_.voxel_pitch; }
  std::span<const float> slice(std::size_t z) const { return data_.plane(z); }

  bool operator==(const Volume&) const = default;

 private:
  VolumeGrid grid_;
  Array3<float> data_;
};

// Throws DataError if any value is NaN or infinite.
void require_finite(std::span<const float> values, const char* what);

}  // namespace lwct
