#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quadmesh/grid.hpp"

namespace quadmesh {

// Polyline sampled at grid resolution; point n sits at parameter n/(size-1).
class BoundaryCurve {
 public:
  // Throws DomainError on fewer than two points or a non-finite coordinate.
  explicit BoundaryCurve(std::vector<Point2> points);

  std::size_t size() const noexcept { return points_.size(); }
  const Point2& operator[](std::size_t n) const noexcept { return points_[n]; }
  const Point2& front() const noexcept { return points_.front(); }
  const Point2& back() const noexcept { return points_.back(); }
  std::span<const Point2> points() const noexcept { return points_; }

 private:
  std::vector<Point2> points_;
};

// Samples curve(t) at n uniform parameters in [0, 1]. The end points are taken
// verbatim from `start` and `end` so that curves sharing a corner agree on it
// bit for bit.
BoundaryCurve sample_curve(const std::function<Point2(double)>& curve, int n, Point2 start,
                           Point2 end);

BoundaryCurve sample_segment(Point2 a, Point2 b, int n);

// Four boundary curves of a logically rectangular region. bottom/top run along
// xi (ni points), left/right along eta (nj points).
struct DomainSpec {
  std::string name;
  BoundaryCurve bottom;
  BoundaryCurve top;
  BoundaryCurve left;
  BoundaryCurve right;

  int ni() const noexcept { return static_cast<int>(bottom.size()); }
  int nj() const noexcept { return static_cast<int>(left.size()); }
};

// Checks curve lengths and corner consistency (to 1e-12, relative to the
// coordinate magnitude). Throws DomainError.
void validate(const DomainSpec& domain);

// Linear transfinite interpolation of the four boundary curves. Boundary rows
// and columns copy the curves exactly.
StructuredGrid tfi_init(const DomainSpec& domain);

// square, quarter_annulus, horseshoe, c_channel. Throws DomainError listing the
// valid names for anything else.
DomainSpec builtin_domain(std::string_view name, int ni, int nj);

std::span<const std::string_view> builtin_domain_names() noexcept;

}  // namespace quadmesh
