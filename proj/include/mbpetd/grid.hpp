// Tensor-product node grids with boundary metadata and the unknown set X*.
#ifndef MBPETD_GRID_HPP
#define MBPETD_GRID_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mbpetd {

inline constexpr int kMaxDim = 3;

enum class BoundaryKind { Periodic, Neumann, Dirichlet };

inline const char* to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::Periodic: return "periodic";
    case BoundaryKind::Neumann: return "neumann";
    case BoundaryKind::Dirichlet: return "dirichlet";
  }
  return "?";
}

/// Boundary values g(x, t); x has one entry per grid axis.
using BoundaryData = std::function<double(std::span<const double>, double)>;

struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::Periodic;
  BoundaryData data;  // Dirichlet only

  static BoundaryCondition periodic() { return {BoundaryKind::Periodic, {}}; }
  static BoundaryCondition neumann() { return {BoundaryKind::Neumann, {}}; }
  static BoundaryCondition dirichlet(BoundaryData g) {
    return {BoundaryKind::Dirichlet, std::move(g)};
  }
  static BoundaryCondition homogeneous_dirichlet() {
    return dirichlet([](std::span<const double>, double) { return 0.0; });
  }
};

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Neighbor reference from an unknown: either another unknown or a Dirichlet
/// boundary node of the lattice.
struct Neighbor {
  bool is_unknown;
  std::size_t index;  // unknown index, or lattice node index when !is_unknown
};

/// Node-centred tensor grid x_i = a + i h, i = 0..N on every axis.
///
/// The unknown set X* follows the boundary kind: lattice indices 1..N on each
/// axis for periodic (the half-open box (a, b]), every node for homogeneous
/// Neumann, and interior nodes only for Dirichlet. With a mask, a node is a
/// Dirichlet boundary node when it lies on the box boundary or touches a
/// masked-out node in its 3^d neighbourhood.
class Grid {
 public:
  Grid(Box box, std::vector<int> cells, BoundaryCondition bc,
       std::optional<std::vector<bool>> mask = std::nullopt)
      : dim_(static_cast<int>(cells.size())),
        box_(std::move(box)),
        cells_(std::move(cells)),
        bc_(std::move(bc)),
        mask_(std::move(mask)) {
    validate();
    for (int k = 0; k < dim_; ++k) {
      h_[k] = (box_.upper[k] - box_.lower[k]) / cells_[k];
      extent_[k] = static_cast<std::size_t>(cells_[k]) + 1;
    }
    stride_[0] = 1;
    for (int k = 1; k < dim_; ++k) stride_[k] = stride_[k - 1] * extent_[k - 1];
    lattice_size_ = stride_[dim_ - 1] * extent_[dim_ - 1];
    if (mask_ && mask_->size() != lattice_size_) {
      throw std::invalid_argument("mask size " + std::to_string(mask_->size()) +
                                  " does not match lattice size " +
                                  std::to_string(lattice_size_));
    }
    if (mask_) check_connected();
    classify_nodes();
    build_neighbors();
  }

  int dim() const { return dim_; }
  const Box& box() const { return box_; }
  double lower(int axis) const { return box_.lower[axis]; }
  double upper(int axis) const { return box_.upper[axis]; }
  int cells(int axis) const { return cells_[axis]; }
  std::span<const int> cells() const { return cells_; }
  double spacing(int axis) const { return h_[axis]; }
  const BoundaryCondition& bc() const { return bc_; }
  BoundaryKind bc_kind() const { return bc_.kind; }
  bool has_mask() const { return mask_.has_value(); }

  /// Number of unknowns |X*|.
  std::size_t size() const { return unknown_nodes_.size(); }

  std::size_t lattice_size() const { return lattice_size_; }
  std::size_t extent(int axis) const { return extent_[axis]; }
  std::size_t stride(int axis) const { return stride_[axis]; }

  /// Lattice node of each unknown, x-fastest order.
  std::span<const std::size_t> unknown_nodes() const { return unknown_nodes_; }
  /// Dirichlet boundary nodes (active nodes outside X*); empty otherwise.
  std::span<const std::size_t> boundary_nodes() const { return boundary_nodes_; }

  bool active(std::size_t node) const { return !mask_ || (*mask_)[node]; }

  /// Unknown index of a lattice node, or nullopt when the node is not in X*.
  std::optional<std::size_t> unknown_of(std::size_t node) const {
    const std::int64_t u = node_to_unknown_[node];
    if (u < 0) return std::nullopt;
    return static_cast<std::size_t>(u);
  }

  std::array<std::size_t, kMaxDim> lattice_index(std::size_t node) const {
    std::array<std::size_t, kMaxDim> idx{};
    for (int k = dim_ - 1; k >= 0; --k) {
      idx[k] = node / stride_[k];
      node %= stride_[k];
    }
    return idx;
  }

  std::size_t node_of(const std::array<std::size_t, kMaxDim>& idx) const {
    std::size_t node = 0;
    for (int k = 0; k < dim_; ++k) node += idx[k] * stride_[k];
    return node;
  }

  double coordinate(std::size_t node, int axis) const {
    return box_.lower[axis] + static_cast<double>(lattice_index(node)[axis]) * h_[axis];
  }

  std::array<double, kMaxDim> coordinates(std::size_t node) const {
    std::array<double, kMaxDim> x{};
    const auto idx = lattice_index(node);
    for (int k = 0; k < dim_; ++k) {
      x[k] = box_.lower[k] + static_cast<double>(idx[k]) * h_[k];
    }
    return x;
  }

  /// Stencil neighbour of unknown `u` along `axis`; side -1 is the lower
  /// neighbour, +1 the upper one. Periodic wraps and Neumann mirrors.
  Neighbor neighbor(std::size_t u, int axis, int side) const {
    const std::int64_t code = neighbors_[(u * dim_ + axis) * 2 + (side > 0 ? 1 : 0)];
    if (code >= 0) return {true, static_cast<std::size_t>(code)};
    return {false, static_cast<std::size_t>(-code - 1)};
  }

  /// Cell volume h_1 ... h_d.
  double cell_volume() const {
    double v = 1.0;
    for (int k = 0; k < dim_; ++k) v *= h_[k];
    return v;
  }

  double boundary_value(std::size_t node, double t) const {
    const auto x = coordinates(node);
    return bc_.data(std::span<const double>(x.data(), dim_), t);
  }

 private:
  void validate() const {
    if (dim_ < 1 || dim_ > kMaxDim) {
      throw std::invalid_argument("grid dimension must be 1, 2 or 3");
    }
    if (static_cast<int>(box_.lower.size()) != dim_ ||
        static_cast<int>(box_.upper.size()) != dim_) {
      throw std::invalid_argument("box bounds do not match the grid dimension");
    }
    for (int k = 0; k < dim_; ++k) {
      if (!(box_.upper[k] > box_.lower[k]) || !std::isfinite(box_.lower[k]) ||
          !std::isfinite(box_.upper[k])) {
        throw std::invalid_argument("degenerate box on axis " + std::to_string(k));
      }
      if (cells_[k] < 2) {
        throw std::invalid_argument("need at least 2 cells on axis " + std::to_string(k));
      }
    }
    if (bc_.kind == BoundaryKind::Periodic && mask_) {
      throw std::invalid_argument("periodic boundary condition requires a rectangular box (no mask)");
    }
    if (bc_.kind == BoundaryKind::Neumann && mask_) {
      throw std::invalid_argument("masked domains are supported with Dirichlet data only");
    }
    if (bc_.kind == BoundaryKind::Dirichlet && !bc_.data) {
      throw std::invalid_argument("Dirichlet boundary condition needs boundary data");
    }
  }

  /// The active nodes of a mask must form one axis-connected region.
  void check_connected() const {
    std::size_t first = lattice_size_;
    std::size_t active_count = 0;
    for (std::size_t node = 0; node < lattice_size_; ++node) {
      if ((*mask_)[node]) {
        ++active_count;
        if (first == lattice_size_) first = node;
      }
    }
    if (active_count == 0) throw std::invalid_argument("mask leaves no active nodes");
    std::vector<bool> seen(lattice_size_, false);
    std::vector<std::size_t> stack{first};
    seen[first] = true;
    std::size_t reached = 0;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      ++reached;
      const auto idx = lattice_index(node);
      for (int k = 0; k < dim_; ++k) {
        for (int side : {-1, 1}) {
          if ((side < 0 && idx[k] == 0) || (side > 0 && idx[k] + 1 == extent_[k])) continue;
          const std::size_t nb = side < 0 ? node - stride_[k] : node + stride_[k];
          if ((*mask_)[nb] && !seen[nb]) {
            seen[nb] = true;
            stack.push_back(nb);
          }
        }
      }
    }
    if (reached != active_count) throw std::invalid_argument("mask active region is not connected");
  }

  bool on_box_boundary(const std::array<std::size_t, kMaxDim>& idx) const {
    for (int k = 0; k < dim_; ++k) {
      if (idx[k] == 0 || idx[k] == extent_[k] - 1) return true;
    }
    return false;
  }

  bool touches_masked(const std::array<std::size_t, kMaxDim>& idx) const {
    if (!mask_) return false;
    std::array<int, kMaxDim> off{};
    const int total = dim_ == 1 ? 3 : dim_ == 2 ? 9 : 27;
    for (int c = 0; c < total; ++c) {
      int r = c;
      for (int k = 0; k < dim_; ++k) {
        off[k] = r % 3 - 1;
        r /= 3;
      }
      std::size_t node = 0;
      bool inside = true;
      for (int k = 0; k < dim_; ++k) {
        const auto j = static_cast<std::int64_t>(idx[k]) + off[k];
        if (j < 0 || j >= static_cast<std::int64_t>(extent_[k])) {
          inside = false;
          break;
        }
        node += static_cast<std::size_t>(j) * stride_[k];
      }
      if (inside && !(*mask_)[node]) return true;
    }
    return false;
  }

  void classify_nodes() {
    node_to_unknown_.assign(lattice_size_, -1);
    for (std::size_t node = 0; node < lattice_size_; ++node) {
      const auto idx = lattice_index(node);
      bool unknown = false;
      switch (bc_.kind) {
        case BoundaryKind::Periodic:
          unknown = std::all_of(idx.begin(), idx.begin() + dim_,
                                [](std::size_t i) { return i >= 1; });
          break;
        case BoundaryKind::Neumann:
          unknown = true;
          break;
        case BoundaryKind::Dirichlet:
          if (!active(node)) break;
          unknown = !on_box_boundary(idx) && !touches_masked(idx);
          if (!unknown) boundary_nodes_.push_back(node);
          break;
      }
      if (unknown) {
        node_to_unknown_[node] = static_cast<std::int64_t>(unknown_nodes_.size());
        unknown_nodes_.push_back(node);
      }
    }
    if (unknown_nodes_.empty()) throw std::invalid_argument("grid has no unknowns");
  }

  void build_neighbors() {
    neighbors_.resize(unknown_nodes_.size() * dim_ * 2);
    for (std::size_t u = 0; u < unknown_nodes_.size(); ++u) {
      const auto idx = lattice_index(unknown_nodes_[u]);
      for (int k = 0; k < dim_; ++k) {
        const auto last = extent_[k] - 1;
        for (int s = 0; s < 2; ++s) {
          auto nb = idx;
          if (s == 0) {
            if (idx[k] > 0) {
              nb[k] = idx[k] - 1;
            } else {
              nb[k] = 1;  // Neumann mirror; periodic index 0 never occurs
            }
            if (bc_.kind == BoundaryKind::Periodic && nb[k] == 0) nb[k] = last;
          } else {
            if (idx[k] < last) {
              nb[k] = idx[k] + 1;
            } else {
              nb[k] = bc_.kind == BoundaryKind::Periodic ? 1 : last - 1;
            }
          }
          const std::size_t node = node_of(nb);
          const std::int64_t unk = node_to_unknown_[node];
          neighbors_[(u * dim_ + k) * 2 + s] =
              unk >= 0 ? unk : -static_cast<std::int64_t>(node) - 1;
        }
      }
    }
  }

  int dim_;
  Box box_;
  std::vector<int> cells_;
  BoundaryCondition bc_;
  std::optional<std::vector<bool>> mask_;
  std::array<double, kMaxDim> h_{};
  std::array<std::size_t, kMaxDim> extent_{};
  std::array<std::size_t, kMaxDim> stride_{};
  std::size_t lattice_size_ = 0;
  std::vector<std::size_t> unknown_nodes_;
  std::vector<std::size_t> boundary_nodes_;
  std::vector<std::int64_t> node_to_unknown_;
  std::vector<std::int64_t> neighbors_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr build_grid(Box box, std::vector<int> n_cells, BoundaryCondition bc,
                          std::optional<std::vector<bool>> mask = std::nullopt) {
  return std::make_shared<const Grid>(std::move(box), std::move(n_cells), std::move(bc),
                                      std::move(mask));
}

/// Active-node mask for a 2D box with its lower-left quadrant removed: the
/// L-shaped domain. Nodes on the quadrant's edges stay active (they are the
/// staircase boundary). Requires even cell counts so the cut lies on nodes.
inline std::vector<bool> lshape_mask(std::span<const int> cells) {
  if (cells.size() != 2) throw std::invalid_argument("L-shape mask is two-dimensional");
  if (cells[0] % 2 != 0 || cells[1] % 2 != 0) {
    throw std::invalid_argument("L-shape mask needs even cell counts");
  }
  const std::size_t nx = static_cast<std::size_t>(cells[0]) + 1;
  const std::size_t ny = static_cast<std::size_t>(cells[1]) + 1;
  const std::size_t cx = static_cast<std::size_t>(cells[0] / 2);
  const std::size_t cy = static_cast<std::size_t>(cells[1] / 2);
  std::vector<bool> mask(nx * ny, true);
  for (std::size_t j = 0; j < cy; ++j) {
    for (std::size_t i = 0; i < cx; ++i) mask[i + nx * j] = false;
  }
  return mask;
}

/// Scalar values on X*. Values are finite by construction.
class Field {
 public:
  Field() = default;
  Field(GridPtr grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("field needs a grid");
    if (values_.size() != grid_->size()) {
      throw std::invalid_argument("field length " + std::to_string(values_.size()) +
                                  " does not match |X*| = " + std::to_string(grid_->size()));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::domain_error("non-finite field value");
    }
  }

  const GridPtr& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::vector<double> release() && { return std::move(values_); }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

template <class F>
Field sample_function(const GridPtr& grid, F&& f) {
  std::vector<double> values(grid->size());
  const auto nodes = grid->unknown_nodes();
  for (std::size_t u = 0; u < nodes.size(); ++u) {
    const auto x = grid->coordinates(nodes[u]);
    values[u] = f(std::span<const double>(x.data(), grid->dim()));
  }
  return Field(grid, std::move(values));
}

inline double sup_norm(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

inline double sup_norm(const Field& field) { return sup_norm(field.values()); }

/// Sup norm over X* plus the Dirichlet boundary values g(., t).
inline double sup_norm_with_boundary(const Field& field, double t) {
  double m = sup_norm(field);
  const Grid& g = *field.grid();
  if (g.bc_kind() == BoundaryKind::Dirichlet) {
    for (std::size_t node : g.boundary_nodes()) {
      m = std::max(m, std::abs(g.boundary_value(node, t)));
    }
  }
  return m;
}

/// Values on the full (N+1)^d lattice: X* values, Dirichlet data at time t on
/// boundary nodes, periodic images on the wrapped face, NaN on masked nodes.
inline std::vector<double> lattice_values(const Grid& grid, std::span<const double> values,
                                          double t) {
  std::vector<double> out(grid.lattice_size(), std::nan(""));
  const auto nodes = grid.unknown_nodes();
  for (std::size_t u = 0; u < nodes.size(); ++u) out[nodes[u]] = values[u];
  switch (grid.bc_kind()) {
    case BoundaryKind::Dirichlet:
      for (std::size_t node : grid.boundary_nodes()) out[node] = grid.boundary_value(node, t);
      break;
    case BoundaryKind::Periodic:
      for (std::size_t node = 0; node < grid.lattice_size(); ++node) {
        auto idx = grid.lattice_index(node);
        bool wrapped = false;
        for (int k = 0; k < grid.dim(); ++k) {
          if (idx[k] == 0) {
            idx[k] = grid.extent(k) - 1;
            wrapped = true;
          }
        }
        if (wrapped) out[node] = out[grid.node_of(idx)];
      }
      break;
    case BoundaryKind::Neumann:
      break;
  }
  return out;
}

/// Counter-based uniform variate in [-1, 1): splitmix64 of (seed, index).
/// Independent of platform and evaluation order.
inline double counter_uniform(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  const double unit = static_cast<double>(z >> 11) * 0x1.0p-53;
  return 2.0 * unit - 1.0;
}

/// amplitude * rand on X*, with rand uniform on [-1, 1) indexed by lattice node.
inline Field sample_random(const GridPtr& grid, double amplitude, std::uint64_t seed) {
  std::vector<double> values(grid->size());
  const auto nodes = grid->unknown_nodes();
  for (std::size_t u = 0; u < nodes.size(); ++u) {
    values[u] = amplitude * counter_uniform(seed, nodes[u]);
  }
  return Field(grid, std::move(values));
}

}  // namespace mbpetd

#endif  // MBPETD_GRID_HPP
