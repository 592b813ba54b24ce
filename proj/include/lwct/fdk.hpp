#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "lwct/geometry.hpp"

namespace lwct {

enum class FilterWindow { None, Hann };

// Backprojection distance weight. Standard is R^2/U^2; Linear is the R^2/U
// form, kept for comparison only (it biases the reconstruction by ~U).
enum class FdkWeight { Standard, Linear };

FilterWindow parse_filter_window(std::string_view name);
FdkWeight parse_fdk_weight(std::string_view name);
std::string_view to_string(FilterWindow w);
std::string_view to_string(FdkWeight w);

struct FdkOptions {
  FilterWindow window = FilterWindow::None;
  FdkWeight weight = FdkWeight::Standard;
  int workers = 0;  // 0 = OpenMP default
};

// p'(a,b) = p(a,b) * R / sqrt(R^2 + a^2 + b^2).
ProjectionStack cosine_weight(const ProjectionStack& stack);

// FFT length used for a detector row of `cols` samples: twice the next power
// of two, so linear convolution never wraps.
std::size_t ramp_padded_length(std::size_t cols);

// Frequency response on the r2c grid (padded/2 + 1 bins): the DFT of the
// band-limited spatial Ram-Lak kernel, scaled by the sample spacing, with the
// DC bin forced to zero. Optionally apodized.
std::vector<double> ramp_response(std::size_t padded, double spacing, FilterWindow window);

// Circular filtering of a buffer whose length is already the FFT length.
void ramp_filter_circular(std::span<double> buffer, double spacing, FilterWindow window);

// Row-wise 1D ramp filtering along a, zero-padded.
ProjectionStack ramp_filter(const ProjectionStack& stack, FilterWindow window = FilterWindow::None);

// Weighted voxel-driven backprojection with bilinear detector interpolation:
// f = sum_views (dbeta/2) * w(U) * p~(a, b), dbeta = 2 pi / views. The 1/2
// accounts for every ray being measured twice over a full circle. Voxels that
// project off the detector receive nothing from that view.
Volume backproject(const ProjectionStack& filtered, const VolumeGrid& grid,
                   const FdkOptions& options = {});

// cosine_weight -> ramp_filter -> backproject.
Volume reconstruct(const ProjectionStack& stack, const VolumeGrid& grid,
                   const FdkOptions& options = {});

}  // namespace lwct
