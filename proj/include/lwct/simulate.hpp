#pragma once

#include <cstdint>

#include "lwct/geometry.hpp"
#include "lwct/phantom.hpp"

namespace lwct {

// Voxel value = sum of densities of primitives containing the voxel center.
Volume voxelize(const Phantom& phantom, const VolumeGrid& grid);

// Exact analytic line integrals: for every detector pixel, the ray from the
// source through the pixel center on the virtual detector is intersected with
// each primitive. Pixel-center sampling only.
ProjectionStack forward_project(const Phantom& phantom, const ScanGeometry& geometry);

// Chord length of the infinite line origin + t*dir through a primitive.
// dir must be unit length.
double intersection_length(const Shape& shape, const Vec3& origin, const Vec3& dir);

// I.i.d. additive Gaussian noise, deterministic for a given seed.
ProjectionStack add_noise(const ProjectionStack& stack, double sigma, std::uint64_t seed);

}  // namespace lwct
