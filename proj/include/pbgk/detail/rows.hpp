#ifndef PBGK_DETAIL_ROWS_HPP
#define PBGK_DETAIL_ROWS_HPP

#include <cstddef>
#include <vector>

#include "pbgk/grid.hpp"

namespace pbgk::detail {

// Visits every contiguous row of a row-major field (all cells sharing the
// leading indices, varying the last axis). fn(base_offset, leading_indices).
// Single fixed traversal order; every reduction in the library rides on this
// so runs are bit-reproducible.
template <typename Fn>
void for_each_row(const PhaseGrid& g, Fn&& fn) {
  const int lead = g.dim() - 1;
  std::vector<int> idx(static_cast<std::size_t>(lead), 0);
  const std::size_t row_len = static_cast<std::size_t>(g.axis(lead).points);
  const std::size_t rows = g.cells() / row_len;
  std::size_t offset = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    fn(offset, idx);
    offset += row_len;
    for (int a = lead - 1; a >= 0; --a) {
      if (++idx[static_cast<std::size_t>(a)] < g.axis(a).points) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }
}

}  // namespace pbgk::detail

#endif
