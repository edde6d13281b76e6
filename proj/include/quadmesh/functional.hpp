#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quadmesh/grid.hpp"
#include "quadmesh/weight_expr.hpp"

namespace quadmesh {

enum class FunctionalTag { Length, Area, Orthogonality, Combined, Winslow, Liao, ModifiedLiao };

// Which corner terms a node-local objective includes.
//   Own:  the 4 corners rooted at the node.
//   Full: additionally the corners of the 4 axis neighbours that reference the
//         node (2 per interior neighbour), i.e. every term of the global sum
//         that depends on the node position.
enum class Stencil { Own, Full };

const char* to_string(Stencil s) noexcept;

// One of the seven discrete functionals and its parameters. Area and Combined
// may carry an adaptive weight s(x, y); without one s is identically 1.
class FunctionalKind {
 public:
  static FunctionalKind length();
  static FunctionalKind area(std::optional<WeightExpr> weight = std::nullopt);
  static FunctionalKind orthogonality();
  // Requires k_area + k_length + k_ortho = 1 (to 1e-12) and each >= 0;
  // throws PreconditionError otherwise.
  static FunctionalKind combined(double k_area, double k_length, double k_ortho,
                                 std::optional<WeightExpr> weight = std::nullopt);
  // Combined with (0.5, 0.0, 0.5).
  static FunctionalKind knupp();
  static FunctionalKind winslow();
  static FunctionalKind liao();
  static FunctionalKind modified_liao();

  FunctionalTag tag() const noexcept { return tag_; }
  // Winslow and Modified Liao diverge as det -> 0 and are undefined for det <= 0.
  bool is_barrier() const noexcept {
    return tag_ == FunctionalTag::Winslow || tag_ == FunctionalTag::ModifiedLiao;
  }
  // True when corner terms depend on s, i.e. Area, or Combined with k_area > 0,
  // carrying an explicit weight.
  bool uses_weight() const noexcept;
  const WeightExpr* weight() const noexcept { return weight_ ? &*weight_ : nullptr; }

  double k_area() const noexcept { return k_area_; }
  double k_length() const noexcept { return k_length_; }
  double k_ortho() const noexcept { return k_ortho_; }

  // Command-line spelling: length, area, ortho, knupp, combined:kA,kL,kO,
  // winslow, liao, modliao.
  std::string name() const;

 private:
  explicit FunctionalKind(FunctionalTag tag) : tag_(tag) {}
  FunctionalTag tag_;
  double k_area_ = 0.0;
  double k_length_ = 0.0;
  double k_ortho_ = 0.0;
  std::optional<WeightExpr> weight_;
};

// Inverse of FunctionalKind::name(). The weight is attached to area and
// combined kinds and ignored otherwise. Throws PreconditionError.
FunctionalKind parse_functional(std::string_view text,
                                std::optional<WeightExpr> weight = std::nullopt);

// Per-corner terms.
double corner_length(const CornerFrame& f) noexcept;          // g11 + g22
double corner_area(const CornerFrame& f, double s) noexcept;  // s det^2
double corner_ortho(const CornerFrame& f) noexcept;           // g12^2
double corner_winslow(const CornerFrame& f);                  // (g11 + g22) / det
double corner_liao(const CornerFrame& f) noexcept;            // g11^2 + g22^2 + 2 g12^2
double corner_modliao(const CornerFrame& f);                  // (g11 + g22)^2 / gdet
double corner_combined(const CornerFrame& f, double k_area, double k_length, double k_ortho,
                       double s) noexcept;

// Dispatch on kind. Barrier kinds throw BarrierError when det <= 0.
double corner_value(const CornerFrame& f, const FunctionalKind& kind, double s);

// A corner term and its derivatives with respect to the frame's covariant
// vectors.
struct CornerPartials {
  double value = 0.0;
  Vec2 d_g1;
  Vec2 d_g2;
};

// Derivatives for barrier kinds assume det > 0; the caller checks.
CornerPartials corner_partials(const CornerFrame& f, const FunctionalKind& kind, double s) noexcept;

struct CornerTerm {
  double value = 0.0;
  // Derivative with respect to the position of the node the frame is rooted at.
  Vec2 grad_wrt_center;
};

CornerTerm corner_term(const CornerFrame& f, const FunctionalKind& kind, double s);

// A corner term that depends on one particular node: the frame rooted at
// `root` in `quadrant`, where g1 and g2 change by c1 * dP and c2 * dP when the
// node moves by dP.
struct DependentTerm {
  GridIndex root;
  Quadrant quadrant = Quadrant::NE;
  int c1 = 0;
  int c2 = 0;
};

class TermList {
 public:
  void push_back(const DependentTerm& t) noexcept { items_[size_++] = t; }
  const DependentTerm* begin() const noexcept { return items_.data(); }
  const DependentTerm* end() const noexcept { return items_.data() + size_; }
  std::size_t size() const noexcept { return size_; }

 private:
  std::array<DependentTerm, 12> items_{};
  std::size_t size_ = 0;
};

// Terms of the local objective of interior node k.
TermList dependent_terms(const StructuredGrid& grid, GridIndex k, Stencil stencil);

// Frame of term t with node k moved to p.
CornerFrame dependent_frame(const StructuredGrid& grid, GridIndex k, const Point2& p,
                            const DependentTerm& t) noexcept;

// Centroid of the corner triangle {root, xi-neighbour, eta-neighbour}; the
// point at which the adaptive weight of that corner is sampled.
Point2 corner_centroid(const StructuredGrid& grid, GridIndex root, Quadrant q) noexcept;

// Adaptive weights frozen at one geometry, one value per interior corner.
class CornerWeights {
 public:
  // Throws EvalError if the expression cannot be evaluated at a centroid.
  static CornerWeights sample(const StructuredGrid& grid, const WeightExpr& weight);

  double at(GridIndex root, Quadrant q) const noexcept {
    return values_[(static_cast<std::size_t>(root.j) * ni_ + root.i) * 4 + static_cast<int>(q)];
  }
  // Number of sampled corners with s <= 0.
  int nonpositive_count() const noexcept { return nonpositive_; }

 private:
  int ni_ = 0;
  std::vector<double> values_;
  int nonpositive_ = 0;
};

// Node-local objective of interior node k as a function of its position,
// with every other node held fixed. Weights come from `frozen` when given and
// are otherwise evaluated at the current (trial) corner centroids.
class LocalObjective {
 public:
  LocalObjective(const StructuredGrid& grid, GridIndex k, const FunctionalKind& kind,
                 Stencil stencil, const CornerWeights* frozen = nullptr);

  GridIndex node() const noexcept { return k_; }
  const Point2& current() const noexcept { return grid_.at(k_); }

  // nullopt if a barrier kind meets a corner with det <= 0.
  std::optional<double> value(const Point2& p) const;
  // Weights are constants in the derivative.
  std::optional<Vec2> gradient(const Point2& p) const;

  // Smallest det over every corner that references the node (the full
  // stencil, whatever stencil the objective uses).
  double min_dependent_det(const Point2& p) const noexcept;

  // Frame of a dependent term with the node placed at p.
  CornerFrame frame(const DependentTerm& t, const Point2& p) const noexcept;

 private:
  double weight(const DependentTerm& t, const Point2& p) const;

  const StructuredGrid& grid_;
  GridIndex k_;
  const FunctionalKind& kind_;
  const CornerWeights* frozen_;
  TermList terms_;
  TermList dependents_;
};

// Sum of the stencil's corner terms at node k. Throws PreconditionError for a
// boundary node and BarrierError on det <= 0 for barrier kinds.
double local_value(const StructuredGrid& grid, GridIndex k, const FunctionalKind& kind,
                   Stencil stencil, const CornerWeights* frozen = nullptr);

// Analytic gradient of local_value with respect to P(k), weights held fixed.
Vec2 local_gradient(const StructuredGrid& grid, GridIndex k, const FunctionalKind& kind,
                    Stencil stencil, const CornerWeights* frozen = nullptr);

// Sum over interior nodes of their 4 own corner terms. BarrierError names the
// first node (sweep order) with a corner det <= 0.
double global_value(const StructuredGrid& grid, const FunctionalKind& kind,
                    const CornerWeights* frozen = nullptr);

}  // namespace quadmesh
