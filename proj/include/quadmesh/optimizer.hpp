#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "quadmesh/functional.hpp"
#include "quadmesh/grid.hpp"
#include "quadmesh/quality.hpp"

namespace quadmesh {

struct OptimizerConfig {
  double tol = 1e-8;  // max node displacement per sweep, relative to the bbox diagonal
  int max_sweeps = 500;  // per phase (untangling and optimization separately)
  Stencil stencil = Stencil::Full;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 40;
  double untangle_margin_factor = 1e-3;
  // Reserved for randomized tie-breaking; the current sweep order is fixed
  // and nothing consumes it.
  std::uint64_t rng_seed = 0;

  // Throws PreconditionError.
  void validate() const;
};

struct SweepStats {
  int sweep_index = 0;
  double max_displacement = 0.0;  // relative to the bbox diagonal
  // For functional sweeps: global value with the sweep's frozen weights.
  // For untangling sweeps: total fold penalty at the sweep's threshold.
  double global_value_before = 0.0;
  double global_value_after = 0.0;
  int nodes_moved = 0;
  // Nodes with a non-zero gradient for which no step passed the line search.
  int backtrack_failures = 0;
};

struct OptimizeResult {
  StructuredGrid grid;
  bool converged = false;
  int untangle_sweeps = 0;
  std::vector<SweepStats> untangle_stats;
  std::vector<SweepStats> sweeps;
  QualityReport final_quality;
};

// Outcome of one node-local solve.
struct NodeStep {
  Point2 position;
  double decrease = 0.0;  // old local value minus new (>= 0)
  bool moved = false;
  bool line_search_failed = false;
};

// Per-sweep data shared by every node solve.
struct NodeContext {
  double scale = 1.0;  // bbox diagonal; the finite-difference step is 1e-6 * scale
  const CornerWeights* weights = nullptr;  // frozen adaptive weights, if any
};

NodeContext make_context(const StructuredGrid& grid, const FunctionalKind& kind,
                         const CornerWeights* weights = nullptr);

// Safeguarded Newton step for interior node k: analytic gradient, central
// finite-difference Hessian, Armijo backtracking, steepest-descent fallback.
// For barrier kinds every corner referencing the node keeps det > 0.
// Returns the original point with zero decrease when nothing is acceptable.
NodeStep optimize_node(const StructuredGrid& grid, GridIndex k, const FunctionalKind& kind,
                       const OptimizerConfig& cfg, const NodeContext& ctx);
// Convenience overload: weights are sampled at the current geometry.
NodeStep optimize_node(const StructuredGrid& grid, GridIndex k, const FunctionalKind& kind,
                       const OptimizerConfig& cfg);

// beta = margin_factor * mean |det| over all interior corners.
double untangle_threshold(const StructuredGrid& grid, double margin_factor) noexcept;

// sum over corners referencing node k of max(0, beta - det)^2.
double fold_penalty(const StructuredGrid& grid, GridIndex k, double beta);

// Same descent applied to fold_penalty; never increases it.
NodeStep untangle_node(const StructuredGrid& grid, GridIndex k, const OptimizerConfig& cfg,
                       double beta, double scale);
NodeStep untangle_node(const StructuredGrid& grid, GridIndex k, const OptimizerConfig& cfg);

// One in-place Gauss-Seidel pass over interior nodes (j outer, i inner).
// Adaptive weights are sampled once at the start of the sweep.
SweepStats sweep(StructuredGrid& grid, const FunctionalKind& kind, const OptimizerConfig& cfg);

// One Gauss-Seidel pass of untangle_node with beta fixed at the sweep start.
SweepStats untangle_sweep(StructuredGrid& grid, const OptimizerConfig& cfg);

struct OptimizeHooks {
  std::function<void(const SweepStats&)> on_untangle_sweep;
  std::function<void(const SweepStats&)> on_sweep;
  // Receives warnings such as non-positive adaptive weights. Without a
  // handler they go to std::cerr.
  std::function<void(std::string_view)> on_warning;
};

// Untangles first for barrier kinds (UntangleError after max_sweeps with
// folds left), then sweeps until max_displacement <= tol or max_sweeps.
// Boundary nodes are never written.
OptimizeResult optimize(StructuredGrid grid, const FunctionalKind& kind, const OptimizerConfig& cfg,
                        const OptimizeHooks& hooks = {});

}  // namespace quadmesh
