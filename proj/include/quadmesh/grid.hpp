#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "quadmesh/vec2.hpp"

namespace quadmesh {

// Lattice coordinates of a node: i runs along xi, j along eta.
struct GridIndex {
  int i = 0;
  int j = 0;
  friend constexpr bool operator==(const GridIndex&, const GridIndex&) = default;
};

// ni x nj lattice of points stored row-major with i fastest (index j*ni + i).
// Nodes on i in {0, ni-1} or j in {0, nj-1} are boundary nodes and are never
// moved by the optimizer.
class StructuredGrid {
 public:
  // All nodes at the origin. Throws PreconditionError unless ni, nj >= 2.
  StructuredGrid(int ni, int nj);
  // Throws PreconditionError on a size mismatch or non-finite coordinates.
  StructuredGrid(int ni, int nj, std::vector<Point2> nodes);

  int ni() const noexcept { return ni_; }
  int nj() const noexcept { return nj_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  std::size_t linear(GridIndex k) const noexcept {
    return static_cast<std::size_t>(k.j) * static_cast<std::size_t>(ni_) +
           static_cast<std::size_t>(k.i);
  }

  const Point2& at(GridIndex k) const noexcept { return nodes_[linear(k)]; }
  Point2& at(GridIndex k) noexcept { return nodes_[linear(k)]; }
  const Point2& operator()(int i, int j) const noexcept { return at({i, j}); }
  Point2& operator()(int i, int j) noexcept { return at({i, j}); }

  std::span<const Point2> nodes() const noexcept { return nodes_; }

  bool contains(GridIndex k) const noexcept {
    return k.i >= 0 && k.i < ni_ && k.j >= 0 && k.j < nj_;
  }
  bool is_interior(GridIndex k) const noexcept {
    return k.i > 0 && k.i < ni_ - 1 && k.j > 0 && k.j < nj_ - 1;
  }
  bool is_boundary(GridIndex k) const noexcept { return contains(k) && !is_interior(k); }
  int interior_count() const noexcept { return (ni_ - 2) * (nj_ - 2); }

  // Diagonal of the axis-aligned bounding box of all nodes.
  double bbox_diagonal() const noexcept;

  friend bool operator==(const StructuredGrid&, const StructuredGrid&) = default;

 private:
  int ni_;
  int nj_;
  std::vector<Point2> nodes_;
};

// Interior nodes in sweep order: j outer, i inner.
template <class Fn>
void for_each_interior(const StructuredGrid& grid, Fn&& fn) {
  for (int j = 1; j < grid.nj() - 1; ++j) {
    for (int i = 1; i < grid.ni() - 1; ++i) fn(GridIndex{i, j});
  }
}

enum class Quadrant { NE, NW, SW, SE };

inline constexpr std::array<Quadrant, 4> kQuadrants{Quadrant::NE, Quadrant::NW, Quadrant::SW,
                                                    Quadrant::SE};

const char* to_string(Quadrant q) noexcept;

// Covariant vectors of one cell corner. Differences are oriented so that g1
// points towards increasing i and g2 towards increasing j in every quadrant;
// on a uniform Cartesian grid all four frames of a node have det = +1.
struct CornerFrame {
  Vec2 g1;
  Vec2 g2;
  Quadrant quadrant = Quadrant::NE;

  // Jacobian matrix [g1 g2] stored column-major.
  std::array<double, 4> jacobian() const noexcept { return {g1.x, g1.y, g2.x, g2.y}; }
  // Evaluated with a fused difference of products, accurate to a few ulps
  // even for nearly parallel vectors.
  double det() const noexcept;
  double g11() const noexcept { return dot(g1, g1); }
  double g12() const noexcept { return dot(g1, g2); }
  double g22() const noexcept { return dot(g2, g2); }
  // g11 g22 - g12^2, accumulated in double-double so the cancellation for
  // nearly parallel vectors does not destroy it.
  double gdet() const noexcept;
};

// Lattice offsets describing how a quadrant's frame is assembled from its
// root node r:
//   g1 = P(r + xi_head) - P(r + xi_tail),  g2 = P(r + eta_head) - P(r + eta_tail)
// where one of head/tail is always the root itself.
struct QuadrantStencil {
  GridIndex xi_head;
  GridIndex xi_tail;
  GridIndex eta_head;
  GridIndex eta_tail;
};

QuadrantStencil quadrant_stencil(Quadrant q) noexcept;

// The two lattice neighbours (along xi and along eta) that bound quadrant q of
// the cell at r.
std::array<GridIndex, 2> quadrant_neighbours(GridIndex root, Quadrant q) noexcept;

// Frame of quadrant q rooted at an interior node. No bounds checking.
CornerFrame corner_frame(const StructuredGrid& grid, GridIndex root, Quadrant q) noexcept;

// Frames NE, NW, SW, SE for interior node k (PreconditionError otherwise).
std::array<CornerFrame, 4> corner_frames(const StructuredGrid& grid, GridIndex k);

// Frobenius condition number ||J|| ||J^-1|| = (g11 + g22) / det.
// Throws DegenerateFrameError when det <= 0.
double condition_number(const CornerFrame& frame);

}  // namespace quadmesh
