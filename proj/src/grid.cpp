#include "quadmesh/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quadmesh/error.hpp"

namespace quadmesh {

namespace {

void check_dimensions(int ni, int nj) {
  if (ni < 2 || nj < 2) {
    throw PreconditionError("grid dimensions must be at least 2x2, got " + std::to_string(ni) +
                            "x" + std::to_string(nj));
  }
}

GridIndex offset(GridIndex k, GridIndex d) noexcept { return {k.i + d.i, k.j + d.j}; }

// Unevaluated sum hi + lo.
struct DoubleDouble {
  double hi;
  double lo;
};

DoubleDouble two_prod(double a, double b) noexcept {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

DoubleDouble quick_two_sum(double a, double b) noexcept {
  const double s = a + b;
  return {s, b - (s - a)};
}

DoubleDouble add(DoubleDouble a, DoubleDouble b) noexcept {
  const double s = a.hi + b.hi;
  const double bb = s - a.hi;
  double e = (a.hi - (s - bb)) + (b.hi - bb);
  e += a.lo + b.lo;
  return quick_two_sum(s, e);
}

DoubleDouble mul(DoubleDouble a, DoubleDouble b) noexcept {
  DoubleDouble p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

DoubleDouble dd_dot(const Vec2& a, const Vec2& b) noexcept {
  return add(two_prod(a.x, b.x), two_prod(a.y, b.y));
}

}  // namespace

StructuredGrid::StructuredGrid(int ni, int nj) : ni_(ni), nj_(nj) {
  check_dimensions(ni, nj);
  nodes_.resize(static_cast<std::size_t>(ni) * static_cast<std::size_t>(nj));
}

StructuredGrid::StructuredGrid(int ni, int nj, std::vector<Point2> nodes)
    : ni_(ni), nj_(nj), nodes_(std::move(nodes)) {
  check_dimensions(ni, nj);
  const auto expected = static_cast<std::size_t>(ni) * static_cast<std::size_t>(nj);
  if (nodes_.size() != expected) {
    throw PreconditionError("grid expects " + std::to_string(expected) + " nodes, got " +
                            std::to_string(nodes_.size()));
  }
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    if (!is_finite(nodes_[n])) {
      throw PreconditionError("non-finite coordinate at node " + std::to_string(n));
    }
  }
}

double StructuredGrid::bbox_diagonal() const noexcept {
  double xmin = nodes_.front().x, xmax = xmin;
  double ymin = nodes_.front().y, ymax = ymin;
  for (const auto& p : nodes_) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return std::hypot(xmax - xmin, ymax - ymin);
}

double CornerFrame::det() const noexcept {
  // Kahan: g1.x*g2.y - g1.y*g2.x with the rounding error of the second
  // product recovered exactly.
  const double w = g1.y * g2.x;
  const double err = std::fma(-g1.y, g2.x, w);
  return std::fma(g1.x, g2.y, -w) + err;
}

double CornerFrame::gdet() const noexcept {
  const DoubleDouble a = mul(dd_dot(g1, g1), dd_dot(g2, g2));
  const DoubleDouble b = mul(dd_dot(g1, g2), dd_dot(g1, g2));
  const DoubleDouble d = add(a, {-b.hi, -b.lo});
  return d.hi + d.lo;
}

const char* to_string(Quadrant q) noexcept {
  switch (q) {
    case Quadrant::NE: return "NE";
    case Quadrant::NW: return "NW";
    case Quadrant::SW: return "SW";
    case Quadrant::SE: return "SE";
  }
  return "?";
}

QuadrantStencil quadrant_stencil(Quadrant q) noexcept {
  constexpr GridIndex here{0, 0}, east{1, 0}, west{-1, 0}, north{0, 1}, south{0, -1};
  switch (q) {
    case Quadrant::NE: return {east, here, north, here};
    case Quadrant::NW: return {here, west, north, here};
    case Quadrant::SW: return {here, west, here, south};
    case Quadrant::SE: return {east, here, here, south};
  }
  return {};
}

std::array<GridIndex, 2> quadrant_neighbours(GridIndex root, Quadrant q) noexcept {
  const int di = (q == Quadrant::NE || q == Quadrant::SE) ? 1 : -1;
  const int dj = (q == Quadrant::NE || q == Quadrant::NW) ? 1 : -1;
  return {GridIndex{root.i + di, root.j}, GridIndex{root.i, root.j + dj}};
}

CornerFrame corner_frame(const StructuredGrid& grid, GridIndex root, Quadrant q) noexcept {
  const QuadrantStencil s = quadrant_stencil(q);
  return {grid.at(offset(root, s.xi_head)) - grid.at(offset(root, s.xi_tail)),
          grid.at(offset(root, s.eta_head)) - grid.at(offset(root, s.eta_tail)), q};
}

std::array<CornerFrame, 4> corner_frames(const StructuredGrid& grid, GridIndex k) {
  if (!grid.is_interior(k)) {
    throw PreconditionError("corner_frames requires an interior node, got (" +
                            std::to_string(k.i) + ", " + std::to_string(k.j) + ")");
  }
  return {corner_frame(grid, k, Quadrant::NE), corner_frame(grid, k, Quadrant::NW),
          corner_frame(grid, k, Quadrant::SW), corner_frame(grid, k, Quadrant::SE)};
}

double condition_number(const CornerFrame& frame) {
  const double det = frame.det();
  if (!(det > 0.0)) {
    throw DegenerateFrameError("condition number undefined for det = " + std::to_string(det));
  }
  return (frame.g11() + frame.g22()) / det;
}

}  // namespace quadmesh
