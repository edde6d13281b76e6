#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "quadmesh/grid.hpp"
#include "quadmesh/quality.hpp"

namespace quadmesh {

// Native text format:
//   quadgrid 1
//   <ni> <nj>
//   <x> <y>        ni*nj lines, i fastest, shortest round-trip decimals
void write_grid(const StructuredGrid& grid, std::ostream& os);
void write_grid(const StructuredGrid& grid, const std::filesystem::path& path);

// Throws FormatError with the 1-based line number of the problem.
StructuredGrid read_grid(std::istream& is);
StructuredGrid read_grid(const std::filesystem::path& path);

// Legacy ASCII VTK STRUCTURED_GRID with z = 0, nodes in native order.
void write_vtk(const StructuredGrid& grid, std::ostream& os);
void write_vtk(const StructuredGrid& grid, const std::filesystem::path& path);

// Reads back the subset of legacy VTK that write_vtk produces: ASCII
// STRUCTURED_GRID, DIMENSIONS ni nj 1, z ignored. Throws FormatError.
StructuredGrid read_vtk(std::istream& is);

// Native or VTK, chosen from the first line of the file.
StructuredGrid read_grid_any(const std::filesystem::path& path);

// One polyline per grid row and per grid column, y flipped to screen
// convention, viewBox fitted to the bounding box plus a 2% margin.
void write_svg(const StructuredGrid& grid, std::ostream& os);
void write_svg(const StructuredGrid& grid, const std::filesystem::path& path);

// "key = value" per line.
void write_quality(const QualityReport& report, std::ostream& os);

// Shortest decimal that parses back to the same double.
std::string format_double(double v);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace quadmesh
