#ifndef PBGK_FIELD_HPP
#define PBGK_FIELD_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "pbgk/grid.hpp"

namespace pbgk {

// Distribution values on a phase grid, one double per cell, row major.
struct DistributionField {
  GridPtr grid;
  std::vector<double> value;

  DistributionField() = default;
  explicit DistributionField(GridPtr g) : grid(std::move(g)), value(grid->cells(), 0.0) {}
  std::size_t size() const { return value.size(); }
};

// Compensated (Kahan) accumulator. All quadrature reductions run through this
// in a fixed traversal order so results are reproducible and accurate enough
// for 1e-8-level conservation checks on multi-million-cell grids.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

}  // namespace pbgk

#endif
