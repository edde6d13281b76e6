#include "quadmesh/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include "quadmesh/error.hpp"

namespace quadmesh {

namespace {

// Symmetric 2x2 matrix.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  Vec2 apply(const Vec2& v) const noexcept { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  bool positive_definite() const noexcept { return xx > 0.0 && xx * yy - xy * xy > 0.0; }
  Vec2 solve(const Vec2& b) const noexcept {
    const double det = xx * yy - xy * xy;
    return {(yy * b.x - xy * b.y) / det, (xx * b.y - xy * b.x) / det};
  }
};

// Central differences of the analytic gradient, symmetrised.
template <class Gradient>
std::optional<Sym2> fd_hessian(Gradient&& gradient, const Point2& p, double h) {
  const auto gxp = gradient(p + Vec2{h, 0});
  const auto gxm = gradient(p - Vec2{h, 0});
  const auto gyp = gradient(p + Vec2{0, h});
  const auto gym = gradient(p - Vec2{0, h});
  if (!gxp || !gxm || !gyp || !gym) return std::nullopt;
  const Vec2 col_x = (1.0 / (2.0 * h)) * (*gxp - *gxm);
  const Vec2 col_y = (1.0 / (2.0 * h)) * (*gyp - *gym);
  Sym2 H{col_x.x, 0.5 * (col_x.y + col_y.x), col_y.y};
  if (!std::isfinite(H.xx) || !std::isfinite(H.xy) || !std::isfinite(H.yy)) return std::nullopt;
  return H;
}

// Newton direction when the Hessian is positive definite and the full step
// (backtracked) passes Armijo; steepest descent otherwise. `feasible` rejects
// trial points outright (barrier kinds: a dependent det <= 0).
template <class Value, class Gradient, class Feasible>
NodeStep descend(const Point2& p0, Value&& value, Gradient&& gradient, Feasible&& feasible,
                 double fd_step, double step_scale, const OptimizerConfig& cfg) {
  NodeStep out{p0};
  const auto f0 = value(p0);
  const auto g0 = gradient(p0);
  if (!f0 || !g0) return out;
  const Vec2 g = *g0;
  if (g.x == 0.0 && g.y == 0.0) return out;

  const auto line_search = [&](const Vec2& d, double t) {
    const double slope = dot(g, d);
    if (!(slope < 0.0) || !std::isfinite(t)) return false;
    for (int n = 0; n <= cfg.max_backtracks; ++n, t *= cfg.backtrack_factor) {
      const Point2 q = p0 + t * d;
      if (q == p0) return false;
      if (!feasible(q)) continue;
      const auto fq = value(q);
      if (fq && *fq < *f0 && *fq <= *f0 + cfg.armijo_c * t * slope) {
        out.position = q;
        out.decrease = *f0 - *fq;
        out.moved = true;
        return true;
      }
    }
    return false;
  };

  const std::optional<Sym2> H = fd_hessian(gradient, p0, fd_step);
  if (H && H->positive_definite() && line_search(-H->solve(g), 1.0)) return out;

  // Cauchy step along -g when the curvature is positive, else one local
  // edge length.
  double t0 = step_scale / norm(g);
  if (H) {
    const double curvature = dot(g, H->apply(g));
    if (curvature > 0.0) t0 = dot(g, g) / curvature;
  }
  if (line_search(-g, t0)) return out;
  out.line_search_failed = true;
  return out;
}

// Mean distance from node k to its four axis neighbours.
double local_edge_scale(const StructuredGrid& grid, GridIndex k) noexcept {
  const Point2& p = grid.at(k);
  const double sum = norm(grid(k.i + 1, k.j) - p) + norm(grid(k.i - 1, k.j) - p) +
                     norm(grid(k.i, k.j + 1) - p) + norm(grid(k.i, k.j - 1) - p);
  return sum > 0.0 ? 0.25 * sum : 1.0;
}

double fd_step_for(double scale) noexcept { return 1e-6 * (scale > 0.0 ? scale : 1.0); }

struct PenaltyObjective {
  const StructuredGrid& grid;
  GridIndex k;
  double beta;
  TermList terms;

  PenaltyObjective(const StructuredGrid& g, GridIndex node, double b)
      : grid(g), k(node), beta(b), terms(dependent_terms(g, node, Stencil::Full)) {}

  double value(const Point2& p) const noexcept {
    double sum = 0.0;
    for (const auto& t : terms) {
      const double gap = beta - dependent_frame(grid, k, p, t).det();
      if (gap > 0.0) sum += gap * gap;
    }
    return sum;
  }

  Vec2 gradient(const Point2& p) const noexcept {
    Vec2 g;
    for (const auto& t : terms) {
      const CornerFrame f = dependent_frame(grid, k, p, t);
      const double gap = beta - f.det();
      if (gap <= 0.0) continue;
      const Vec2 ddet = static_cast<double>(t.c1) * Vec2{f.g2.y, -f.g2.x} +
                        static_cast<double>(t.c2) * Vec2{-f.g1.y, f.g1.x};
      g += (-2.0 * gap) * ddet;
    }
    return g;
  }
};

double total_penalty(const StructuredGrid& grid, double beta) noexcept {
  double sum = 0.0;
  for_each_interior(grid, [&](GridIndex k) {
    for (Quadrant q : kQuadrants) {
      const double gap = beta - corner_frame(grid, k, q).det();
      if (gap > 0.0) sum += gap * gap;
    }
  });
  return sum;
}

SweepStats functional_sweep(StructuredGrid& grid, const FunctionalKind& kind,
                            const OptimizerConfig& cfg, const CornerWeights* weights) {
  const NodeContext ctx = make_context(grid, kind, weights);
  SweepStats stats;
  stats.global_value_before = global_value(grid, kind, weights);
  double max_move = 0.0;
  for_each_interior(grid, [&](GridIndex k) {
    const NodeStep step = optimize_node(grid, k, kind, cfg, ctx);
    if (step.line_search_failed) ++stats.backtrack_failures;
    if (!step.moved) return;
    max_move = std::max(max_move, norm(step.position - grid.at(k)));
    grid.at(k) = step.position;
    ++stats.nodes_moved;
  });
  stats.max_displacement = max_move / ctx.scale;
  stats.global_value_after = global_value(grid, kind, weights);
  return stats;
}

std::optional<CornerWeights> sample_weights(const StructuredGrid& grid, const FunctionalKind& kind) {
  if (!kind.uses_weight()) return std::nullopt;
  return CornerWeights::sample(grid, *kind.weight());
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
  if (max_sweeps < 1) throw PreconditionError("max_sweeps must be at least 1");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw PreconditionError("backtrack_factor must lie in (0, 1)");
  }
  if (max_backtracks < 0) throw PreconditionError("max_backtracks must be non-negative");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw PreconditionError("armijo_c must lie in (0, 1)");
  if (!(untangle_margin_factor >= 0.0)) {
    throw PreconditionError("untangle_margin_factor must be non-negative");
  }
}

NodeContext make_context(const StructuredGrid& grid, const FunctionalKind&,
                         const CornerWeights* weights) {
  const double diag = grid.bbox_diagonal();
  return {diag > 0.0 ? diag : 1.0, weights};
}

NodeStep optimize_node(const StructuredGrid& grid, GridIndex k, const FunctionalKind& kind,
                       const OptimizerConfig& cfg, const NodeContext& ctx) {
  const LocalObjective obj(grid, k, kind, cfg.stencil, ctx.weights);
  const Point2 p0 = grid.at(k);
  if (kind.is_barrier() && !(obj.min_dependent_det(p0) > 0.0)) {
    throw PreconditionError("node (" + std::to_string(k.i) + ", " + std::to_string(k.j) +
                            ") has a folded corner; untangle before optimizing " + kind.name());
  }
  const auto value = [&](const Point2& p) { return obj.value(p); };
  const auto gradient = [&](const Point2& p) { return obj.gradient(p); };
  const auto feasible = [&](const Point2& p) {
    return !kind.is_barrier() || obj.min_dependent_det(p) > 0.0;
  };
  return descend(p0, value, gradient, feasible, fd_step_for(ctx.scale), local_edge_scale(grid, k),
                 cfg);
}

NodeStep optimize_node(const StructuredGrid& grid, GridIndex k, const FunctionalKind& kind,
                       const OptimizerConfig& cfg) {
  const auto weights = sample_weights(grid, kind);
  return optimize_node(grid, k, kind, cfg, make_context(grid, kind, weights ? &*weights : nullptr));
}

double untangle_threshold(const StructuredGrid& grid, double margin_factor) noexcept {
  double sum = 0.0;
  int count = 0;
  for_each_interior(grid, [&](GridIndex k) {
    for (Quadrant q : kQuadrants) {
      sum += std::abs(corner_frame(grid, k, q).det());
      ++count;
    }
  });
  return count > 0 ? margin_factor * sum / count : 0.0;
}

double fold_penalty(const StructuredGrid& grid, GridIndex k, double beta) {
  return PenaltyObjective(grid, k, beta).value(grid.at(k));
}

NodeStep untangle_node(const StructuredGrid& grid, GridIndex k, const OptimizerConfig& cfg,
                       double beta, double scale) {
  const PenaltyObjective obj(grid, k, beta);
  const auto value = [&](const Point2& p) { return std::optional<double>(obj.value(p)); };
  const auto gradient = [&](const Point2& p) { return std::optional<Vec2>(obj.gradient(p)); };
  const auto feasible = [](const Point2&) { return true; };
  return descend(grid.at(k), value, gradient, feasible, fd_step_for(scale),
                 local_edge_scale(grid, k), cfg);
}

NodeStep untangle_node(const StructuredGrid& grid, GridIndex k, const OptimizerConfig& cfg) {
  return untangle_node(grid, k, cfg, untangle_threshold(grid, cfg.untangle_margin_factor),
                       grid.bbox_diagonal());
}

SweepStats sweep(StructuredGrid& grid, const FunctionalKind& kind, const OptimizerConfig& cfg) {
  const auto weights = sample_weights(grid, kind);
  return functional_sweep(grid, kind, cfg, weights ? &*weights : nullptr);
}

SweepStats untangle_sweep(StructuredGrid& grid, const OptimizerConfig& cfg) {
  const double beta = untangle_threshold(grid, cfg.untangle_margin_factor);
  double scale = grid.bbox_diagonal();
  if (!(scale > 0.0)) scale = 1.0;
  SweepStats stats;
  stats.global_value_before = total_penalty(grid, beta);
  double max_move = 0.0;
  for_each_interior(grid, [&](GridIndex k) {
    const NodeStep step = untangle_node(grid, k, cfg, beta, scale);
    if (step.line_search_failed) ++stats.backtrack_failures;
    if (!step.moved) return;
    max_move = std::max(max_move, norm(step.position - grid.at(k)));
    grid.at(k) = step.position;
    ++stats.nodes_moved;
  });
  stats.max_displacement = max_move / scale;
  stats.global_value_after = total_penalty(grid, beta);
  return stats;
}

OptimizeResult optimize(StructuredGrid grid, const FunctionalKind& kind, const OptimizerConfig& cfg,
                        const OptimizeHooks& hooks) {
  cfg.validate();
  const auto warn = [&](const std::string& message) {
    if (hooks.on_warning) {
      hooks.on_warning(message);
    } else {
      std::cerr << "warning: " << message << '\n';
    }
  };

  OptimizeResult result{std::move(grid), false, 0, {}, {}, {}};
  StructuredGrid& g = result.grid;

  if (kind.is_barrier()) {
    for (int folds = folded_corner_count(g); folds > 0; folds = folded_corner_count(g)) {
      if (result.untangle_sweeps == cfg.max_sweeps) {
        throw UntangleError("untangling left " + std::to_string(folds) + " folded corners after " +
                                std::to_string(cfg.max_sweeps) + " sweeps",
                            folds);
      }
      SweepStats stats = untangle_sweep(g, cfg);
      stats.sweep_index = result.untangle_sweeps++;
      result.untangle_stats.push_back(stats);
      if (hooks.on_untangle_sweep) hooks.on_untangle_sweep(stats);
    }
  }

  bool warned = false;
  for (int n = 0; n < cfg.max_sweeps; ++n) {
    const auto weights = sample_weights(g, kind);
    if (weights && weights->nonpositive_count() > 0 && !warned) {
      warn("adaptive weight is non-positive at " + std::to_string(weights->nonpositive_count()) +
           " corners; using the values as given");
      warned = true;
    }
    SweepStats stats = functional_sweep(g, kind, cfg, weights ? &*weights : nullptr);
    stats.sweep_index = n;
    result.sweeps.push_back(stats);
    if (hooks.on_sweep) hooks.on_sweep(stats);
    if (stats.max_displacement <= cfg.tol) {
      result.converged = true;
      break;
    }
  }
  result.final_quality = quality_report(g, kind);
  return result;
}

}  // namespace quadmesh
