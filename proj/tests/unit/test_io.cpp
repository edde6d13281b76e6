#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>

#include "quadmesh/boundary.hpp"
#include "quadmesh/error.hpp"
#include "quadmesh/grid_io.hpp"
#include "support/oracles.hpp"

using namespace quadmesh;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

template <class Writer>
std::string to_text(const StructuredGrid& g, Writer w) {
  std::ostringstream os;
  w(g, os);
  return os.str();
}

std::size_t format_error_line(const std::string& text) {
  std::istringstream is(text);
  try {
    (void)read_grid(is);
  } catch (const FormatError& e) {
    return e.line();
  }
  return 0;
}

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("quadmesh_io_" + std::to_string(::getpid()));
  TempDir() { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
};

// Arbitrary doubles with full mantissas, including awkward magnitudes.
StructuredGrid noisy_grid(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(2, 9);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> ex(-300, 300);
  const int ni = dim(rng), nj = dim(rng);
  StructuredGrid g(ni, nj);
  for (int j = 0; j < nj; ++j) {
    for (int i = 0; i < ni; ++i) g(i, j) = {std::ldexp(u(rng), ex(rng)), u(rng) / 3.0};
  }
  return g;
}

}  // namespace

TEST_CASE("native format of a 2x2 unit square") {
  const auto g = tfi_init(builtin_domain("square", 2, 2));
  const auto lines = lines_of(to_text(g, [](auto& a, auto& b) { write_grid(a, b); }));
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "quadgrid 1");
  CHECK(lines[1] == "2 2");
  CHECK(lines[2] == "0 0");
  CHECK(lines[3] == "1 0");
  CHECK(lines[4] == "0 1");
  CHECK(lines[5] == "1 1");
}

TEST_CASE("native round trip is bit-exact") {
  std::mt19937_64 rng(41);
  for (int n = 0; n < 100; ++n) {
    const auto g = noisy_grid(rng);
    std::istringstream is(to_text(g, [](auto& a, auto& b) { write_grid(a, b); }));
    CHECK(read_grid(is) == g);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-0.0) == "-0");
  CHECK(format_double(1e-300) == "1e-300");
}

TEST_CASE("malformed native files name the line") {
  CHECK(format_error_line("") == 1);
  CHECK(format_error_line("quadgrid 2\n2 2\n") == 1);
  CHECK(format_error_line("quadgrid 1\n2\n") == 2);
  CHECK(format_error_line("quadgrid 1\n1 2\n0 0\n0 1\n") == 2);
  CHECK(format_error_line("quadgrid 1\n2 2\n0 0\n1 0\n0 1\n1 one\n") == 6);
  CHECK(format_error_line("quadgrid 1\n2 2\n0 0\n1 0\n0 1\n1 1\n1 1\n") == 7);
  CHECK(format_error_line("quadgrid 1\n2 2\n0 0\n1 0\n0 1 2\n1 1\n") == 5);
  CHECK(format_error_line("quadgrid 1\n2 2\n0 0\n1 0\n0 nan\n1 1\n") == 5);

  std::istringstream missing("quadgrid 1\n2 2\n0 0\n1 0\n0 1\n");
  try {
    (void)read_grid(missing);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("expected 4 node lines") != std::string::npos);
  }
}

TEST_CASE("VTK output") {
  const auto g = tfi_init(builtin_domain("square", 3, 3));
  const auto text = to_text(g, [](auto& a, auto& b) { write_vtk(a, b); });
  const auto lines = lines_of(text);
  CHECK(lines[0] == "# vtk DataFile Version 3.0");
  CHECK(lines[2] == "ASCII");
  CHECK(lines[3] == "DATASET STRUCTURED_GRID");
  CHECK(lines[4] == "DIMENSIONS 3 3 1");
  CHECK(lines[5] == "POINTS 9 double");
  CHECK(text == slurp(fs::path(QUADMESH_TEST_DATA) / "golden_3x3.vtk"));

  const auto unit = to_text(tfi_init(builtin_domain("square", 2, 2)),
                            [](auto& a, auto& b) { write_vtk(a, b); });
  const auto ul = lines_of(unit);
  REQUIRE(ul.size() == 10);
  for (int n = 6; n < 10; ++n) CHECK(ul[n].substr(ul[n].size() - 2) == " 0");
}

TEST_CASE("an independent VTK reader recovers the nodes") {
  std::mt19937_64 rng(42);
  for (int n = 0; n < 30; ++n) {
    const auto g = noisy_grid(rng);
    const auto text = to_text(g, [](auto& a, auto& b) { write_vtk(a, b); });
    const auto v = oracle::read_vtk_points(text);
    CHECK(v.ni == g.ni());
    CHECK(v.nj == g.nj());
    CHECK(v.nk == 1);
    REQUIRE(v.xyz.size() == 3 * g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(v.xyz[3 * k] == g.nodes()[k].x);
      CHECK(v.xyz[3 * k + 1] == g.nodes()[k].y);
      CHECK(v.xyz[3 * k + 2] == 0.0);
    }
    std::istringstream is(text);
    CHECK(read_vtk(is) == g);
  }
}

TEST_CASE("SVG output") {
  const auto count = [](const std::string& s, const std::string& what) {
    int n = 0;
    for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
    return n;
  };
  std::mt19937_64 rng(43);
  const auto g = oracle::random_grid(3, 3, rng);
  const auto svg = to_text(g, [](auto& a, auto& b) { write_svg(a, b); });
  CHECK(count(svg, "<polyline") == 6);

  const auto big = to_text(tfi_init(builtin_domain("horseshoe", 12, 5)),
                           [](auto& a, auto& b) { write_svg(a, b); });
  CHECK(count(big, "<polyline") == 17);

  std::smatch m;
  REQUIRE(std::regex_search(big, m, std::regex("viewBox=\"([^ ]+) ([^ ]+) ([^ ]+) ([^\"]+)\"")));
  const double x0 = std::stod(m[1]), y0 = std::stod(m[2]), w = std::stod(m[3]), h = std::stod(m[4]);
  CHECK(w > 0);
  CHECK(h > 0);
  const std::regex pt("(-?[0-9.e+-]+),(-?[0-9.e+-]+)");
  int points = 0;
  for (auto it = std::sregex_iterator(big.begin(), big.end(), pt); it != std::sregex_iterator(); ++it) {
    const double x = std::stod((*it)[1]), y = std::stod((*it)[2]);
    CHECK(x > x0);
    CHECK(x < x0 + w);
    CHECK(y > y0);
    CHECK(y < y0 + h);
    ++points;
  }
  CHECK(points == 2 * 12 * 5);
  // horseshoe apex (0, 1) lies at the top of the picture after the flip
  CHECK(y0 < -1.0);
}

TEST_CASE("SVG of a degenerate grid still has a viewBox") {
  StructuredGrid g(3, 2, std::vector<Point2>(6, Point2{2, 2}));
  const auto svg = to_text(g, [](auto& a, auto& b) { write_svg(a, b); });
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, std::regex("viewBox=\"([^ ]+) ([^ ]+) ([^ ]+) ([^\"]+)\"")));
  CHECK(std::stod(m[3]) > 0);
  CHECK(std::stod(m[4]) > 0);
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg.find("inf") == std::string::npos);
}

TEST_CASE("file writers are atomic and readable") {
  TempDir dir;
  const auto g = tfi_init(builtin_domain("quarter_annulus", 5, 4));
  const auto native = dir.path / "g.grid";
  write_grid(g, native);
  CHECK(read_grid(native) == g);
  CHECK(read_grid_any(native) == g);
  write_vtk(g, dir.path / "g.vtk");
  CHECK(read_grid_any(dir.path / "g.vtk") == g);
  write_svg(g, dir.path / "g.svg");
  for (const auto& e : fs::directory_iterator(dir.path)) CHECK(e.path().extension() != ".tmp");
  CHECK_THROWS_AS(read_grid(dir.path / "absent.grid"), Error);
  CHECK_THROWS_AS(write_grid(g, dir.path / "no" / "such" / "dir.grid"), Error);
}

TEST_CASE("quality document") {
  const auto r = quality_report(tfi_init(builtin_domain("square", 3, 3)), FunctionalKind::winslow());
  std::ostringstream os;
  write_quality(r, os);
  const auto lines = lines_of(os.str());
  CHECK(lines.size() == 12);
  for (const auto& l : lines) CHECK(std::regex_match(l, std::regex("[a-z_]+ = [^ ]+")));
  CHECK(os.str().find("folded_corner_count = 0\n") != std::string::npos);
  CHECK(os.str().find("global_functional_value = 8\n") != std::string::npos);

  auto folded = oracle::uniform_grid(3, 3);
  folded(1, 1) = {3, 1};
  std::ostringstream os2;
  write_quality(quality_report(folded, FunctionalKind::winslow()), os2);
  CHECK(os2.str().find("global_functional_value = undefined\n") != std::string::npos);
}
