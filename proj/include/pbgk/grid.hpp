#ifndef PBGK_GRID_HPP
#define PBGK_GRID_HPP

#include <cstddef>
#include <memory>
#include <vector>

namespace pbgk {

// One uniform axis of a tensor-product phase grid, integrated with the
// composite midpoint rule: node i sits at lo + (i + 1/2) h.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int points = 1;

  double spacing() const { return (hi - lo) / points; }
  double center(int i) const { return lo + (i + 0.5) * spacing(); }
};

// Tensor-product midpoint grid over velocity axes (first) and internal-energy
// axes (last). Storage order is row major with the last axis contiguous.
class PhaseGrid {
public:
  PhaseGrid(std::vector<Axis> velocity, std::vector<Axis> internal);

  int velocity_dim() const { return vdim_; }
  int internal_dim() const { return static_cast<int>(axes_.size()) - vdim_; }
  int dim() const { return static_cast<int>(axes_.size()); }
  const Axis& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
  bool is_velocity_axis(int a) const { return a < vdim_; }

  std::size_t cells() const { return cells_; }
  // Quadrature weight of one cell: the product of the axis spacings.
  double cell_volume() const { return volume_; }
  std::size_t stride(int a) const { return strides_[static_cast<std::size_t>(a)]; }

  // Midpoints of axis a, precomputed once.
  const std::vector<double>& coords(int a) const { return coords_[static_cast<std::size_t>(a)]; }

  // Per-axis indices of a flat cell index (for oracles and slow reference paths).
  std::vector<int> decode(std::size_t flat) const;

private:
  std::vector<Axis> axes_;
  int vdim_ = 0;
  std::size_t cells_ = 1;
  double volume_ = 1.0;
  std::vector<std::size_t> strides_;
  std::vector<std::vector<double>> coords_;
};

using GridPtr = std::shared_ptr<const PhaseGrid>;

// Symmetric axis covering center +- halfwidth.
Axis symmetric_axis(double center, double halfwidth, int points);

}  // namespace pbgk

#endif
