#pragma once

#include <cstdint>
#include <vector>

#include "rawgnn/array.hpp"
#include "rawgnn/rng.hpp"

namespace rawgnn::testutil {

inline Array random_array(std::vector<std::size_t> shape, RngStream& rng, double lo = -1.0,
                          double hi = 1.0) {
  Array a(std::move(shape));
  for (std::size_t i = 0; i < a.numel(); ++i) a[i] = rng.uniform(lo, hi);
  return a;
}

inline std::vector<std::int32_t> random_indices(std::size_t count, std::size_t upper,
                                                RngStream& rng) {
  std::vector<std::int32_t> idx(count);
  for (auto& i : idx) i = static_cast<std::int32_t>(rng.next_index(upper));
  return idx;
}

inline bool bit_equal(const Array& a, const Array& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.numel(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

inline double max_abs_diff(const Array& a, const Array& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    if (d > m) m = d;
  }
  return m;
}

}  // namespace rawgnn::testutil
