#pragma once

#include <optional>
#include <string>

#include "quadmesh/functional.hpp"
#include "quadmesh/grid.hpp"

namespace quadmesh {

// Statistics over the corner frames of all interior nodes and over all cells.
// Grids without interior nodes report zero corners and zero extrema.
struct QualityReport {
  int corner_count = 0;
  int folded_corner_count = 0;  // corners with det <= 0
  double min_corner_det = 0.0;
  double max_corner_det = 0.0;
  // Over corners with det > 0 only.
  double mean_condition_number = 0.0;
  double max_condition_number = 0.0;
  // max |g12| / sqrt(g11 g22) over corners with non-zero edges.
  double max_orthogonality_deviation = 0.0;
  // Signed shoelace areas of the (ni-1)(nj-1) cells.
  double cell_area_min = 0.0;
  double cell_area_mean = 0.0;
  double cell_area_max = 0.0;
  std::string functional;
  // Unset when a barrier functional meets a folded corner.
  std::optional<double> global_functional_value;
};

// Signed area of cell (i, j) with corners (i,j), (i+1,j), (i+1,j+1), (i,j+1).
double cell_area(const StructuredGrid& grid, int i, int j) noexcept;

// Counts corners with det <= 0.
int folded_corner_count(const StructuredGrid& grid) noexcept;

QualityReport quality_report(const StructuredGrid& grid, const FunctionalKind& kind);

}  // namespace quadmesh
