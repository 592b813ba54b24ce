#pragma once

#include <cstddef>

#include "lwct/geometry.hpp"

namespace lwct {

// Keeps views whose index is a multiple of factor; the angle list is filtered
// the same way. factor must divide the view count exactly.
ProjectionStack sparse_sample(const ProjectionStack& stack, std::size_t factor);

}  // namespace lwct
