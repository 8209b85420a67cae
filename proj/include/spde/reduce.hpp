#pragma once

#include <cstddef>
#include <span>

namespace spde {

/// Sum with a fixed pairwise tree: the result depends only on the values and
/// their order, never on how the values were produced.
inline double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 32;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace spde
