#include "quadmesh/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quadmesh/error.hpp"

namespace quadmesh {

double cell_area(const StructuredGrid& grid, int i, int j) noexcept {
  const Point2 p[4] = {grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1)};
  double twice = 0.0;
  for (int n = 0; n < 4; ++n) twice += cross(p[n], p[(n + 1) % 4]);
  return 0.5 * twice;
}

int folded_corner_count(const StructuredGrid& grid) noexcept {
  int folded = 0;
  for_each_interior(grid, [&](GridIndex k) {
    for (Quadrant q : kQuadrants) {
      if (!(corner_frame(grid, k, q).det() > 0.0)) ++folded;
    }
  });
  return folded;
}

QualityReport quality_report(const StructuredGrid& grid, const FunctionalKind& kind) {
  QualityReport r;
  r.functional = kind.name();

  double det_min = std::numeric_limits<double>::infinity();
  double det_max = -det_min;
  double cond_sum = 0.0;
  int cond_count = 0;
  for_each_interior(grid, [&](GridIndex k) {
    for (Quadrant q : kQuadrants) {
      const CornerFrame f = corner_frame(grid, k, q);
      const double det = f.det();
      ++r.corner_count;
      det_min = std::min(det_min, det);
      det_max = std::max(det_max, det);
      if (det > 0.0) {
        const double cond = condition_number(f);
        cond_sum += cond;
        ++cond_count;
        r.max_condition_number = std::max(r.max_condition_number, cond);
      } else {
        ++r.folded_corner_count;
      }
      const double lengths = f.g11() * f.g22();
      if (lengths > 0.0) {
        r.max_orthogonality_deviation =
            std::max(r.max_orthogonality_deviation, std::abs(f.g12()) / std::sqrt(lengths));
      }
    }
  });
  if (r.corner_count > 0) {
    r.min_corner_det = det_min;
    r.max_corner_det = det_max;
  }
  if (cond_count > 0) r.mean_condition_number = cond_sum / cond_count;

  double area_min = std::numeric_limits<double>::infinity();
  double area_max = -area_min;
  double area_sum = 0.0;
  for (int j = 0; j + 1 < grid.nj(); ++j) {
    for (int i = 0; i + 1 < grid.ni(); ++i) {
      const double a = cell_area(grid, i, j);
      area_min = std::min(area_min, a);
      area_max = std::max(area_max, a);
      area_sum += a;
    }
  }
  r.cell_area_min = area_min;
  r.cell_area_max = area_max;
  r.cell_area_mean = area_sum / ((grid.ni() - 1) * (grid.nj() - 1));

  try {
    r.global_functional_value = global_value(grid, kind);
  } catch (const BarrierError&) {
    r.global_functional_value.reset();
  }
  return r;
}

}  // namespace quadmesh
