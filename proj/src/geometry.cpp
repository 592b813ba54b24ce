#include "lwct/geometry.hpp"

#include <cmath>
#include <string>

#include "lwct/error.hpp"

namespace lwct {

ScanGeometry::ScanGeometry(double source_to_axis, std::size_t rows, std::size_t cols,
                           double pixel_pitch, std::vector<double> angles, double offset_row,
                           double offset_col)
    : source_to_axis_(source_to_axis),
      rows_(rows),
      cols_(cols),
      pixel_pitch_(pixel_pitch),
      angles_(std::move(angles)),
      offset_row_(offset_row),
      offset_col_(offset_col) {
  if (!(source_to_axis_ > 0.0) || !std::isfinite(source_to_axis_))
    throw DataError("geometry: source_to_axis must be positive");
  if (!(pixel_pitch_ > 0.0) || !std::isfinite(pixel_pitch_))
    throw DataError("geometry: pixel pitch must be positive");
  if (rows_ < 2 || cols_ < 2) throw DataError("geometry: detector needs at least 2x2 pixels");
  if (!std::isfinite(offset_row_) || !std::isfinite(offset_col_))
    throw DataError("geometry: detector offsets must be finite");
  if (angles_.empty()) throw DataError("geometry: at least one view angle required");
  for (std::size_t i = 0; i < angles_.size(); ++i) {
    const double a = angles_[i];
    if (!(a >= 0.0 && a < kTwoPi))
      throw DataError("geometry: angle " + std::to_string(i) + " outside [0, 2pi)");
    if (i > 0 && !(a > angles_[i - 1]))
      throw DataError("geometry: angles must be strictly increasing");
  }
}

ScanGeometry ScanGeometry::with_angles(std::vector<double> angles) const {
  return ScanGeometry(source_to_axis_, rows_, cols_, pixel_pitch_, std::move(angles), offset_row_,
                      offset_col_);
}

ScanGeometry make_circular_geometry(std::size_t n_views, std::size_t rows, std::size_t cols,
                                    double pitch, double source_to_axis) {
  if (n_views == 0) throw DataError("geometry: n_views must be positive");
  std::vector<double> angles(n_views);
  for (std::size_t i = 0; i < n_views; ++i)
    angles[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n_views);
  return ScanGeometry(source_to_axis, rows, cols, pitch, std::move(angles));
}

ProjectionStack::ProjectionStack(ScanGeometry geometry, Array3<float> data)
    : geometry_(std::move(geometry)), data_(std::move(data)) {
  if (data_.extent(0) != geometry_.views() || data_.extent(1) != geometry_.rows() ||
      data_.extent(2) != geometry_.cols())
    throw DataError("projection stack: data shape does not match geometry");
  require_finite(data_.flat(), "projection stack");
}

ProjectionStack::ProjectionStack(ScanGeometry geometry)
    : geometry_(std::move(geometry)),
      data_(geometry_.views(), geometry_.rows(), geometry_.cols(), 0.0f) {}

void VolumeGrid::validate() const {
  if (nx == 0 || ny == 0 || nz == 0) throw DataError("volume: dimensions must be >= 1");
  if (!(voxel_pitch > 0.0) || !std::isfinite(voxel_pitch))
    throw DataError("volume: voxel pitch must be positive");
}

Volume::Volume(VolumeGrid grid, Array3<float> data) : grid_(grid), data_(std::move(data)) {
  grid_.validate();
  if (data_.extent(0) != grid_.nz || data_.extent(1) != grid_.ny || data_.extent(2) != grid_.nx)
    throw DataError("volume: data shape does not match grid");
  require_finite(data_.flat(), "volume");
}

Volume::Volume(VolumeGrid grid) : grid_(grid) {
  grid_.validate();
  data_ = Array3<float>(grid_.nz, grid_.ny, grid_.nx, 0.0f);
}

void require_finite(std::span<const float> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw DataError(std::string(what) + ": non-finite value at flat index " + std::to_string(i));
  }
}

}  // namespace lwct
