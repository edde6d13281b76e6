#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "quadmesh/boundary.hpp"
#include "quadmesh/error.hpp"
#include "quadmesh/optimizer.hpp"
#include "support/oracles.hpp"

using namespace quadmesh;

namespace {

std::vector<FunctionalKind> unweighted_kinds() {
  return {FunctionalKind::length(),  FunctionalKind::area(),    FunctionalKind::orthogonality(),
          FunctionalKind::knupp(),   FunctionalKind::winslow(), FunctionalKind::liao(),
          FunctionalKind::modified_liao()};
}

// Smallest det over the frames of every interior node that touches k,
// straight from coordinates.
double min_det_around(const StructuredGrid& g, GridIndex k) {
  double m = INFINITY;
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      if (std::abs(di) + std::abs(dj) > 1) continue;
      const GridIndex r{k.i + di, k.j + dj};
      if (!g.is_interior(r)) continue;
      for (auto q : kQuadrants) m = std::min(m, oracle::raw_det(oracle::raw_frame(g, r.i, r.j, q)));
    }
  }
  return m;
}

}  // namespace

TEST_CASE("configuration is validated") {
  OptimizerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tol = 0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  cfg = {};
  cfg.backtrack_factor = 1.0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  cfg = {};
  cfg.max_sweeps = 0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  cfg = {};
  CHECK(cfg.tol == 1e-8);
  CHECK(cfg.max_sweeps == 500);
  CHECK(cfg.stencil == Stencil::Full);
  CHECK(cfg.armijo_c == 1e-4);
  CHECK(cfg.backtrack_factor == 0.5);
  CHECK(cfg.max_backtracks == 40);
  CHECK(cfg.untangle_margin_factor == 1e-3);
  CHECK(cfg.rng_seed == 0);
}

TEST_CASE("length minimizer of a single node is the neighbour mean") {
  auto g = oracle::uniform_grid(3, 3);
  g(0, 1) = {-0.2, 1.1};
  g(1, 2) = {1.3, 2.2};
  g(1, 1) = {1.4, 0.6};
  const Point2 mean = 0.25 * (g(0, 1) + g(2, 1) + g(1, 0) + g(1, 2));

  const auto kind = FunctionalKind::length();
  // The excess form agrees with the library's local value.
  for (const Point2 p : {Point2{1.1, 0.9}, Point2{0.2, 1.7}}) {
    auto t = g;
    t(1, 1) = p;
    CHECK(oracle::length_excess_3x3(g, g(1, 1), p) ==
          doctest::Approx(local_value(t, {1, 1}, kind, Stencil::Full) -
                          local_value(g, {1, 1}, kind, Stencil::Full)));
  }
  const Point2 brute = oracle::brute_force_min(
      [&](const Point2& c, const Point2& p) { return oracle::length_excess_3x3(g, c, p); }, {1, 1},
      1.0, 16);
  CHECK(norm(brute - mean) <= 1e-10);

  OptimizerConfig cfg;
  for (int n = 0; n < 5; ++n) {
    const auto step = optimize_node(g, {1, 1}, kind, cfg);
    CHECK(step.decrease >= 0.0);
    g(1, 1) = step.position;
  }
  CHECK(norm(g(1, 1) - mean) <= 1e-10);
  CHECK(norm(g(1, 1) - brute) <= 1e-10);
}

TEST_CASE("uniform grids do not move") {
  // Under the own stencil every kind is stationary by symmetry. Under the
  // full stencil that holds for kinds whose corner terms are individually at
  // their minimum on unit frames; the others see fewer frames on the
  // boundary side of a near-boundary node (see the next test).
  const auto g = oracle::uniform_grid(5, 5, 0.25);
  for (const auto& kind : unweighted_kinds()) {
    for (auto st : {Stencil::Own, Stencil::Full}) {
      const bool stationary = st == Stencil::Own || kind.tag() == FunctionalTag::Winslow ||
                              kind.tag() == FunctionalTag::ModifiedLiao ||
                              kind.tag() == FunctionalTag::Orthogonality;
      if (!stationary) continue;
      CAPTURE(kind.name());
      CAPTURE(to_string(st));
      OptimizerConfig cfg;
      cfg.stencil = st;
      for_each_interior(g, [&](GridIndex k) {
        const auto step = optimize_node(g, k, kind, cfg);
        CHECK_FALSE(step.moved);
        CHECK(step.position == g.at(k));
        CHECK(step.decrease == 0.0);
      });
      auto copy = g;
      const auto stats = sweep(copy, kind, cfg);
      CHECK(stats.nodes_moved == 0);
      CHECK(stats.max_displacement == 0.0);
      CHECK(copy == g);
    }
  }
  // Length with the full stencil: the centre node has only interior
  // neighbours, so it is stationary too.
  CHECK_FALSE(optimize_node(g, {2, 2}, FunctionalKind::length(), OptimizerConfig{}).moved);
}

TEST_CASE("full-stencil length pulls near-boundary nodes inward") {
  // Frames are rooted at interior nodes only, so an edge to a boundary node
  // enters 2 frames while an edge between interior nodes enters 4. For a
  // unit grid the gradient at node k is -4 (Q - P) summed over interior axis
  // neighbours Q.
  const auto g = oracle::uniform_grid(6, 5);
  for_each_interior(g, [&](GridIndex k) {
    Vec2 expected{0, 0};
    for (GridIndex q : {GridIndex{k.i + 1, k.j}, GridIndex{k.i - 1, k.j}, GridIndex{k.i, k.j + 1},
                        GridIndex{k.i, k.j - 1}}) {
      if (g.is_interior(q)) expected += -4.0 * (g.at(q) - g.at(k));
    }
    const Vec2 grad = local_gradient(g, k, FunctionalKind::length(), Stencil::Full);
    CHECK(grad.x == doctest::Approx(expected.x));
    CHECK(grad.y == doctest::Approx(expected.y));
  });
}

TEST_CASE("barrier steps never fold a dependent corner") {
  std::mt19937_64 rng(31);
  OptimizerConfig cfg;
  for (int trial = 0; trial < 15; ++trial) {
    const auto g = oracle::random_grid(6, 6, rng, 0.24);
    for (const auto& kind : {FunctionalKind::winslow(), FunctionalKind::modified_liao()}) {
      for_each_interior(g, [&](GridIndex k) {
        auto moved = g;
        moved.at(k) = optimize_node(g, k, kind, cfg).position;
        CHECK(min_det_around(moved, k) > 0.0);
      });
    }
  }
}

TEST_CASE("optimize_node requires an untangled stencil for barrier kinds") {
  auto g = oracle::uniform_grid(4, 4);
  g(1, 1) = {2.5, 1.0};
  OptimizerConfig cfg;
  CHECK_THROWS_AS(optimize_node(g, {1, 1}, FunctionalKind::winslow(), cfg), PreconditionError);
  CHECK_THROWS_AS(optimize_node(g, {0, 1}, FunctionalKind::length(), cfg), PreconditionError);
  CHECK_NOTHROW(optimize_node(g, {1, 1}, FunctionalKind::liao(), cfg));
}

TEST_CASE("untangling") {
  OptimizerConfig cfg;
  SUBCASE("healthy node is left alone") {
    const auto g = oracle::uniform_grid(4, 4);
    const double beta = untangle_threshold(g, cfg.untangle_margin_factor);
    CHECK(beta == doctest::Approx(1e-3));
    CHECK(fold_penalty(g, {1, 2}, beta) == 0.0);
    const auto step = untangle_node(g, {1, 2}, cfg);
    CHECK_FALSE(step.moved);
    CHECK(step.position == g(1, 2));
  }
  SUBCASE("centre reflected through its east neighbour") {
    auto g = oracle::uniform_grid(3, 3);
    g(1, 1) = 2.0 * g(2, 1) - g(1, 1);
    CHECK(min_det_around(g, {1, 1}) < 0);
    for (int n = 0; n < 50 && min_det_around(g, {1, 1}) <= 0; ++n) {
      const double beta = untangle_threshold(g, cfg.untangle_margin_factor);
      const double before = fold_penalty(g, {1, 1}, beta);
      const auto step = untangle_node(g, {1, 1}, cfg);
      g(1, 1) = step.position;
      CHECK(fold_penalty(g, {1, 1}, beta) <= before);
    }
    for (auto q : kQuadrants) CHECK(oracle::raw_det(oracle::raw_frame(g, 1, 1, q)) > 0);
  }
  SUBCASE("penalty never increases on random tangles") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 10; ++trial) {
      const auto g = oracle::random_grid(6, 6, rng, 0.9);
      const double beta = untangle_threshold(g, cfg.untangle_margin_factor);
      const double scale = g.bbox_diagonal();
      for_each_interior(g, [&](GridIndex k) {
        auto moved = g;
        moved.at(k) = untangle_node(g, k, cfg, beta, scale).position;
        CHECK(fold_penalty(moved, k, beta) <= fold_penalty(g, k, beta));
      });
    }
  }
}

TEST_CASE("sweep equals a hand-written Gauss-Seidel replay") {
  std::mt19937_64 rng(33);
  const auto start = oracle::random_grid(6, 6, rng);
  OptimizerConfig cfg;
  for (const auto& kind : {FunctionalKind::length(), FunctionalKind::winslow(),
                           FunctionalKind::area(weight_preset("paper_abs_sine"))}) {
    auto swept = start;
    const auto stats = sweep(swept, kind, cfg);

    auto replay = start;
    const auto weights = kind.weight() ? std::optional(CornerWeights::sample(start, *kind.weight()))
                                       : std::nullopt;
    const NodeContext ctx = make_context(start, kind, weights ? &*weights : nullptr);
    int moved = 0;
    for (int j = 1; j < 5; ++j) {
      for (int i = 1; i < 5; ++i) {
        const auto step = optimize_node(replay, {i, j}, kind, cfg, ctx);
        if (step.moved) {
          replay(i, j) = step.position;
          ++moved;
        }
      }
    }
    CAPTURE(kind.name());
    CHECK(replay == swept);
    CHECK(stats.nodes_moved == moved);
    CHECK(stats.global_value_after <= stats.global_value_before);
  }
}

TEST_CASE("TFI square is already optimal") {
  const auto g = tfi_init(builtin_domain("square", 9, 7));
  for (const auto& kind : unweighted_kinds()) {
    CAPTURE(kind.name());
    OptimizerConfig cfg;
    cfg.stencil = Stencil::Own;
    const auto r = optimize(g, kind, cfg);
    CHECK(r.converged);
    CHECK(r.sweeps.size() <= 2);
    CHECK(r.sweeps.front().max_displacement <= 1e-12);
  }
  // Full stencil: boundary-adjacent nodes see fewer frames, so only square
  // cells keep every corner term at its minimum.
  const auto sq = tfi_init(builtin_domain("square", 9, 9));
  for (const auto& kind : {FunctionalKind::winslow(), FunctionalKind::modified_liao(),
                           FunctionalKind::orthogonality()}) {
    CAPTURE(kind.name());
    const auto r = optimize(sq, kind, {});
    CHECK(r.converged);
    CHECK(r.sweeps.size() <= 2);
  }
}

TEST_CASE("horseshoe folds are removed by barrier functionals") {
  const auto g = tfi_init(builtin_domain("horseshoe", 33, 9));
  REQUIRE(folded_corner_count(g) > 0);
  for (const auto& kind : {FunctionalKind::winslow(), FunctionalKind::modified_liao()}) {
    const auto r = optimize(g, kind, {});
    CHECK(r.untangle_sweeps > 0);
    CHECK(r.final_quality.folded_corner_count == 0);
    CHECK(folded_corner_count(r.grid) == 0);
    CHECK(r.final_quality.global_functional_value.has_value());
  }
}

TEST_CASE("untangling gives up after max_sweeps") {
  const auto g = tfi_init(builtin_domain("horseshoe", 33, 9));
  OptimizerConfig cfg;
  cfg.max_sweeps = 1;
  try {
    (void)optimize(g, FunctionalKind::winslow(), cfg);
    FAIL("expected UntangleError");
  } catch (const UntangleError& e) {
    CHECK(e.remaining_folds() > 0);
  }
}

TEST_CASE("boundary nodes are bit-identical after optimize") {
  const auto g = tfi_init(builtin_domain("c_channel", 11, 9));
  OptimizerConfig cfg;
  cfg.max_sweeps = 30;
  for (const auto& kind : unweighted_kinds()) {
    const auto r = optimize(g, kind, cfg);
    for (int j = 0; j < g.nj(); ++j) {
      for (int i = 0; i < g.ni(); ++i) {
        if (g.is_boundary({i, j})) CHECK(r.grid(i, j) == g(i, j));
      }
    }
  }
}

TEST_CASE("optimize is deterministic") {
  const auto g = tfi_init(builtin_domain("horseshoe", 17, 7));
  OptimizerConfig cfg;
  cfg.max_sweeps = 40;
  const auto a = optimize(g, FunctionalKind::winslow(), cfg);
  const auto b = optimize(g, FunctionalKind::winslow(), cfg);
  CHECK(a.grid == b.grid);
  CHECK(a.sweeps.size() == b.sweeps.size());
}

TEST_CASE("full-stencil sweeps descend monotonically") {
  std::mt19937_64 rng(34);
  OptimizerConfig cfg;
  cfg.max_sweeps = 25;
  const auto g = oracle::random_grid(8, 8, rng, 0.24);
  for (const auto& kind : unweighted_kinds()) {
    CAPTURE(kind.name());
    const auto r = optimize(g, kind, cfg);
    double previous = INFINITY;
    for (const auto& s : r.sweeps) {
      CHECK(s.global_value_after <= s.global_value_before + 1e-12 * std::abs(s.global_value_before));
      CHECK(s.global_value_before <= previous + 1e-12 * std::abs(previous));
      previous = s.global_value_after;
    }
  }
}

TEST_CASE("barrier sweeps stay fold-free") {
  std::mt19937_64 rng(35);
  OptimizerConfig cfg;
  auto g = oracle::random_grid(9, 9, rng, 0.24);
  for (int n = 0; n < 20; ++n) {
    (void)sweep(g, FunctionalKind::winslow(), cfg);
    CHECK(folded_corner_count(g) == 0);
    (void)sweep(g, FunctionalKind::modified_liao(), cfg);
    CHECK(folded_corner_count(g) == 0);
  }
}

TEST_CASE("converged grids are stationary") {
  const auto g = tfi_init(builtin_domain("quarter_annulus", 9, 7));
  for (const auto& kind : {FunctionalKind::length(), FunctionalKind::winslow()}) {
    const OptimizerConfig cfg;
    const auto r = optimize(g, kind, cfg);
    REQUIRE(r.converged);
    CHECK(r.sweeps.back().max_displacement <= cfg.tol);
    // A displacement residual of tol corresponds to a gradient of about
    // |H| tol; the Hessian is estimated by central differences.
    for_each_interior(r.grid, [&](GridIndex k) {
      const double h = 1e-5 * r.grid.bbox_diagonal();
      double hess = 0.0;
      for (const Vec2 e : {Vec2{h, 0}, Vec2{0, h}}) {
        auto t = r.grid;
        t.at(k) = r.grid.at(k) + e;
        const Vec2 gp = local_gradient(t, k, kind, Stencil::Full);
        t.at(k) = r.grid.at(k) - e;
        const Vec2 gm = local_gradient(t, k, kind, Stencil::Full);
        hess = std::max(hess, norm(gp - gm) / (2 * h));
      }
      CAPTURE(kind.name());
      CHECK(norm(local_gradient(r.grid, k, kind, Stencil::Full)) <= 1e2 * cfg.tol * hess);
    });
  }
}

TEST_CASE("non-positive adaptive weights are reported once") {
  const auto g = tfi_init(builtin_domain("square", 9, 9));
  OptimizerConfig cfg;
  cfg.max_sweeps = 3;
  std::vector<std::string> warnings;
  OptimizeHooks hooks;
  hooks.on_warning = [&](std::string_view w) { warnings.emplace_back(w); };
  int sweeps_seen = 0;
  hooks.on_sweep = [&](const SweepStats&) { ++sweeps_seen; };
  const auto r = optimize(g, FunctionalKind::area(weight_preset("paper_sine")), cfg, hooks);
  CHECK(warnings.size() == 1);
  CHECK(sweeps_seen == static_cast<int>(r.sweeps.size()));
}
