#pragma once

// Uniform hypercube partition of [0,1]^D with deterministic cell lookup.
//
// Cells are half-open boxes [j/h, (j+1)/h) per axis with the top face of the
// last cell closed, so every point of [0,1]^D belongs to exactly one cell.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "mcsel/core.hpp"

namespace mcsel {

struct CellId {
  std::vector<int> coords;
  friend bool operator==(const CellId&, const CellId&) = default;
};

// Smallest h >= 1 with h^(3*alpha + D) >= T, i.e. ceil(T^(1/(3*alpha + D))).
inline int cells_per_axis(long horizon, double alpha, int dimension) {
  if (horizon < 1) throw std::invalid_argument("cells_per_axis: horizon must be >= 1");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("cells_per_axis: alpha must be in (0,1]");
  if (dimension < 1) throw std::invalid_argument("cells_per_axis: dimension must be >= 1");
  const double exponent = 3.0 * alpha + dimension;
  const double log_horizon = std::log(static_cast<double>(horizon));
  int h = 1;
  // Log-domain comparison with a relative slack so exact powers (e.g. 10^4 with
  // exponent 4) do not round up to h+1.
  while (exponent * std::log(static_cast<double>(h)) < log_horizon * (1.0 - 1e-12) - 1e-12) ++h;
  return h;
}

class UniformPartition {
 public:
  UniformPartition(int dimension, int cells_per_axis)
      : dimension_(dimension), cells_per_axis_(cells_per_axis) {
    if (dimension < 1) throw std::invalid_argument("UniformPartition: dimension must be >= 1");
    if (cells_per_axis < 1)
      throw std::invalid_argument("UniformPartition: cells_per_axis must be >= 1");
  }

  static UniformPartition for_horizon(long horizon, double alpha, int dimension) {
    return UniformPartition(dimension, mcsel::cells_per_axis(horizon, alpha, dimension));
  }

  int dimension() const { return dimension_; }
  int cells_per_axis() const { return cells_per_axis_; }

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (int d = 0; d < dimension_; ++d) n *= static_cast<std::size_t>(cells_per_axis_);
    return n;
  }

  // Cell containing ctx; axis k maps to min(floor(ctx_k * h), h-1).
  CellId locate(std::span<const double> ctx) const {
    if (static_cast<int>(ctx.size()) != dimension_)
      throw std::invalid_argument("UniformPartition::locate: dimension mismatch");
    require_unit_coords(ctx, "UniformPartition::locate");
    CellId cell;
    cell.coords.resize(dimension_);
    for (int d = 0; d < dimension_; ++d) {
      int c = static_cast<int>(std::floor(ctx[d] * cells_per_axis_));
      if (c > cells_per_axis_ - 1) c = cells_per_axis_ - 1;
      if (c < 0) c = 0;
      cell.coords[d] = c;
    }
    return cell;
  }

  CellId locate(const JointContext& ctx) const { return locate(std::span<const double>(ctx.values)); }

  // Row-major flat index, coords[0] outermost. Bijective with cells.
  std::size_t flatten(const CellId& cell) const {
    if (static_cast<int>(cell.coords.size()) != dimension_)
      throw std::invalid_argument("UniformPartition::flatten: dimension mismatch");
    std::size_t index = 0;
    for (int d = 0; d < dimension_; ++d) {
      const int c = cell.coords[d];
      if (c < 0 || c >= cells_per_axis_)
        throw std::invalid_argument("UniformPartition::flatten: coordinate out of range");
      index = index * static_cast<std::size_t>(cells_per_axis_) + static_cast<std::size_t>(c);
    }
    return index;
  }

  CellId unflatten(std::size_t index) const {
    if (index >= cell_count())
      throw std::invalid_argument("UniformPartition::unflatten: index out of range");
    CellId cell;
    cell.coords.resize(dimension_);
    for (int d = dimension_ - 1; d >= 0; --d) {
      cell.coords[d] = static_cast<int>(index % static_cast<std::size_t>(cells_per_axis_));
      index /= static_cast<std::size_t>(cells_per_axis_);
    }
    return cell;
  }

 private:
  int dimension_;
  int cells_per_axis_;
};

}  // namespace mcsel
