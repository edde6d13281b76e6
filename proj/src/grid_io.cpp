#include "quadmesh/grid_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

#include "quadmesh/error.hpp"

namespace quadmesh {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits on runs of blanks.
std::vector<std::string_view> fields(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] != ' ' && s[pos] != '\t') ++pos;
    if (pos > start) out.push_back(s.substr(start, pos - start));
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& value) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string render(const StructuredGrid& grid, void (*writer)(const StructuredGrid&, std::ostream&)) {
  std::ostringstream os;
  writer(grid, os);
  return os.str();
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open '" + tmp.string() + "' for writing");
    os << contents;
    os.flush();
    if (!os) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move output into place at '" + path.string() + "'");
  }
}

void write_grid(const StructuredGrid& grid, std::ostream& os) {
  os << "quadgrid 1\n" << grid.ni() << ' ' << grid.nj() << '\n';
  for (const auto& p : grid.nodes()) os << format_double(p.x) << ' ' << format_double(p.y) << '\n';
}

void write_grid(const StructuredGrid& grid, const std::filesystem::path& path) {
  write_file_atomic(path, render(grid, static_cast<void (*)(const StructuredGrid&, std::ostream&)>(write_grid)));
}

StructuredGrid read_grid(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  const auto next = [&]() -> bool {
    while (std::getline(is, line)) {
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  if (!next()) throw FormatError("empty file, expected header 'quadgrid 1'", line_no + 1);
  if (trim(line) != "quadgrid 1") {
    throw FormatError("expected header 'quadgrid 1', got '" + std::string(trim(line)) + "'", line_no);
  }
  if (!next()) throw FormatError("missing dimension line 'ni nj'", line_no + 1);
  const auto dims = fields(line);
  int ni = 0, nj = 0;
  if (dims.size() != 2 || !parse_number(dims[0], ni) || !parse_number(dims[1], nj)) {
    throw FormatError("expected dimension line 'ni nj'", line_no);
  }
  if (ni < 2 || nj < 2) throw FormatError("grid dimensions must be at least 2x2", line_no);

  const std::size_t expected = static_cast<std::size_t>(ni) * static_cast<std::size_t>(nj);
  std::vector<Point2> nodes;
  nodes.reserve(expected);
  while (nodes.size() < expected) {
    if (!next()) {
      throw FormatError("expected " + std::to_string(expected) + " node lines, found " +
                            std::to_string(nodes.size()),
                        line_no + 1);
    }
    const auto xy = fields(line);
    Point2 p;
    if (xy.size() != 2 || !parse_number(xy[0], p.x) || !parse_number(xy[1], p.y)) {
      throw FormatError("expected node coordinates 'x y'", line_no);
    }
    if (!is_finite(p)) throw FormatError("non-finite node coordinate", line_no);
    nodes.push_back(p);
  }
  if (next()) {
    throw FormatError("unexpected content after " + std::to_string(expected) + " node lines",
                      line_no);
  }
  return StructuredGrid(ni, nj, std::move(nodes));
}

StructuredGrid read_grid(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  return read_grid(is);
}

void write_vtk(const StructuredGrid& grid, std::ostream& os) {
  os << "# vtk DataFile Version 3.0\n"
     << "quadmesh structured grid\n"
     << "ASCII\n"
     << "DATASET STRUCTURED_GRID\n"
     << "DIMENSIONS " << grid.ni() << ' ' << grid.nj() << " 1\n"
     << "POINTS " << grid.size() << " double\n";
  for (const auto& p : grid.nodes()) os << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
}

void write_vtk(const StructuredGrid& grid, const std::filesystem::path& path) {
  write_file_atomic(path, render(grid, static_cast<void (*)(const StructuredGrid&, std::ostream&)>(write_vtk)));
}

StructuredGrid read_vtk(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  const auto next = [&]() -> bool {
    while (std::getline(is, line)) {
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };
  const auto expect = [&](std::string_view want) {
    if (!next() || trim(line) != want) {
      throw FormatError("expected '" + std::string(want) + "'", line_no);
    }
  };

  if (!next() || trim(line).substr(0, 22) != "# vtk DataFile Version") {
    throw FormatError("missing VTK header", line_no);
  }
  if (!next()) throw FormatError("missing title line", line_no + 1);
  expect("ASCII");
  expect("DATASET STRUCTURED_GRID");

  if (!next()) throw FormatError("missing DIMENSIONS line", line_no + 1);
  auto f = fields(line);
  int ni = 0, nj = 0, nk = 0;
  if (f.size() != 4 || f[0] != "DIMENSIONS" || !parse_number(f[1], ni) ||
      !parse_number(f[2], nj) || !parse_number(f[3], nk) || nk != 1 || ni < 2 || nj < 2) {
    throw FormatError("expected 'DIMENSIONS ni nj 1' with ni, nj >= 2", line_no);
  }
  const std::size_t expected = static_cast<std::size_t>(ni) * static_cast<std::size_t>(nj);

  if (!next()) throw FormatError("missing POINTS line", line_no + 1);
  f = fields(line);
  std::size_t count = 0;
  if (f.size() != 3 || f[0] != "POINTS" || !parse_number(f[1], count) ||
      (f[2] != "double" && f[2] != "float")) {
    throw FormatError("expected 'POINTS n double'", line_no);
  }
  if (count != expected) {
    throw FormatError("POINTS count " + std::to_string(count) + " does not match " +
                          std::to_string(expected) + " from DIMENSIONS",
                      line_no);
  }

  // Coordinates may wrap across lines; read them as a flat token stream.
  std::vector<double> values;
  values.reserve(3 * expected);
  while (values.size() < 3 * expected && next()) {
    for (auto tok : fields(line)) {
      double v = 0.0;
      if (!parse_number(tok, v) || !std::isfinite(v)) {
        throw FormatError("bad coordinate '" + std::string(tok) + "'", line_no);
      }
      values.push_back(v);
    }
  }
  if (values.size() != 3 * expected) {
    throw FormatError("expected " + std::to_string(expected) + " points", line_no + 1);
  }
  std::vector<Point2> nodes(expected);
  for (std::size_t n = 0; n < expected; ++n) nodes[n] = {values[3 * n], values[3 * n + 1]};
  return StructuredGrid(ni, nj, std::move(nodes));
}

StructuredGrid read_grid_any(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  std::string first;
  std::getline(is, first);
  is.clear();
  is.seekg(0);
  if (trim(first).substr(0, 5) == "# vtk") return read_vtk(is);
  return read_grid(is);
}

void write_svg(const StructuredGrid& grid, std::ostream& os) {
  double xmin = grid.nodes().front().x, xmax = xmin;
  double ymin = grid.nodes().front().y, ymax = ymin;
  for (const auto& p : grid.nodes()) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double extent = std::max(xmax - xmin, ymax - ymin);
  const double margin = extent > 0.0 ? 0.02 * extent : 1.0;
  const double width = (xmax - xmin) + 2 * margin;
  const double height = (ymax - ymin) + 2 * margin;
  const double stroke = 0.002 * std::max(width, height);

  const auto point = [&](const Point2& p) {
    return format_double(p.x) + "," + format_double(-p.y);
  };
  const auto polyline = [&](auto&& at, int count) {
    os << "  <polyline points=\"";
    for (int n = 0; n < count; ++n) os << (n ? " " : "") << point(at(n));
    os << "\"/>\n";
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << format_double(xmin - margin) << ' '
     << format_double(-ymax - margin) << ' ' << format_double(width) << ' ' << format_double(height)
     << "\">\n"
     << "<g fill=\"none\" stroke=\"black\" stroke-width=\"" << format_double(stroke) << "\">\n";
  for (int j = 0; j < grid.nj(); ++j) polyline([&](int i) { return grid(i, j); }, grid.ni());
  for (int i = 0; i < grid.ni(); ++i) polyline([&](int j) { return grid(i, j); }, grid.nj());
  os << "</g>\n</svg>\n";
}

void write_svg(const StructuredGrid& grid, const std::filesystem::path& path) {
  write_file_atomic(path, render(grid, static_cast<void (*)(const StructuredGrid&, std::ostream&)>(write_svg)));
}

void write_quality(const QualityReport& r, std::ostream& os) {
  os << "functional = " << r.functional << '\n'
     << "corner_count = " << r.corner_count << '\n'
     << "folded_corner_count = " << r.folded_corner_count << '\n'
     << "min_corner_det = " << format_double(r.min_corner_det) << '\n'
     << "max_corner_det = " << format_double(r.max_corner_det) << '\n'
     << "mean_condition_number = " << format_double(r.mean_condition_number) << '\n'
     << "max_condition_number = " << format_double(r.max_condition_number) << '\n'
     << "max_orthogonality_deviation = " << format_double(r.max_orthogonality_deviation) << '\n'
     << "cell_area_min = " << format_double(r.cell_area_min) << '\n'
     << "cell_area_mean = " << format_double(r.cell_area_mean) << '\n'
     << "cell_area_max = " << format_double(r.cell_area_max) << '\n'
     << "global_functional_value = "
     << (r.global_functional_value ? format_double(*r.global_functional_value) : "undefined")
     << '\n';
}

}  // namespace quadmesh
