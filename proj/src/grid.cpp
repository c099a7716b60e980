#include "pbgk/grid.hpp"

#include "pbgk/errors.hpp"

namespace pbgk {

PhaseGrid::PhaseGrid(std::vector<Axis> velocity, std::vector<Axis> internal) {
  vdim_ = static_cast<int>(velocity.size());
  axes_ = std::move(velocity);
  axes_.insert(axes_.end(), internal.begin(), internal.end());
  if (axes_.empty()) throw InvalidGrid("no axes");
  for (const Axis& ax : axes_) {
    if (ax.points < 1) throw InvalidGrid("axis with fewer than one point");
    if (!(ax.hi > ax.lo)) throw InvalidGrid("axis with nonpositive extent");
    cells_ *= static_cast<std::size_t>(ax.points);
    volume_ *= ax.spacing();
  }
  strides_.assign(axes_.size(), 1);
  for (int a = static_cast<int>(axes_.size()) - 2; a >= 0; --a)
    strides_[a] = strides_[a + 1] * static_cast<std::size_t>(axes_[a + 1].points);
  coords_.resize(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    coords_[a].resize(static_cast<std::size_t>(axes_[a].points));
    for (int i = 0; i < axes_[a].points; ++i) coords_[a][static_cast<std::size_t>(i)] = axes_[a].center(i);
  }
}

std::vector<int> PhaseGrid::decode(std::size_t flat) const {
  std::vector<int> idx(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    idx[a] = static_cast<int>(flat / strides_[a]);
    flat %= strides_[a];
  }
  return idx;
}

Axis symmetric_axis(double center, double halfwidth, int points) {
  return Axis{center - halfwidth, center + halfwidth, points};
}

}  // namespace pbgk
