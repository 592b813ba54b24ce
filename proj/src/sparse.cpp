#include "lwct/sparse.hpp"

#include <algorithm>
#include <string>

#include "lwct/error.hpp"

namespace lwct {

ProjectionStack sparse_sample(const ProjectionStack& stack, std::size_t factor) {
  const std::size_t n = stack.views();
  if (factor == 0) throw DataError("sparse: factor must be >= 1");
  if (n % factor != 0)
    throw DataError("sparse: factor " + std::to_string(factor) + " does not divide " +
                    std::to_string(n) + " views");
  if (factor == 1) return stack;

  const std::size_t kept = n / factor;
  std::vector<double> angles(kept);
  Array3<float> data(kept, stack.rows(), stack.cols());
  for (std::size_t i = 0; i < kept; ++i) {
    angles[i] = stack.geometry().angles()[i * factor];
    auto src = stack.view(i * factor);
    std::copy(src.begin(), src.end(), data.plane(i).begin());
  }
  return ProjectionStack(stack.geometry().with_angles(std::move(angles)), std::move(data));
}

}  // namespace lwct
