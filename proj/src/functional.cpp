#include "quadmesh/functional.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <limits>
#include <cmath>
#include <string>

#include "quadmesh/error.hpp"

namespace quadmesh {

namespace {

GridIndex shifted(GridIndex k, GridIndex d) noexcept { return {k.i + d.i, k.j + d.j}; }

std::string format_coefficient(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

[[noreturn]] void throw_barrier(const char* name, double det, int i = -1, int j = -1) {
  std::string where;
  if (i >= 0) where = " at node (" + std::to_string(i) + ", " + std::to_string(j) + ")";
  throw BarrierError(std::string(name) + " undefined for corner det = " + std::to_string(det) + where,
                     i, j);
}

// d det / d g1 and d det / d g2.
Vec2 ddet_dg1(const CornerFrame& f) noexcept { return {f.g2.y, -f.g2.x}; }
Vec2 ddet_dg2(const CornerFrame& f) noexcept { return {-f.g1.y, f.g1.x}; }

CornerPartials length_partials(const CornerFrame& f) noexcept {
  return {f.g11() + f.g22(), 2.0 * f.g1, 2.0 * f.g2};
}

CornerPartials area_partials(const CornerFrame& f, double s) noexcept {
  const double det = f.det();
  const double c = 2.0 * s * det;
  return {s * det * det, c * ddet_dg1(f), c * ddet_dg2(f)};
}

CornerPartials ortho_partials(const CornerFrame& f) noexcept {
  const double g12 = f.g12();
  return {g12 * g12, 2.0 * g12 * f.g2, 2.0 * g12 * f.g1};
}

}  // namespace

const char* to_string(Stencil s) noexcept { return s == Stencil::Own ? "own" : "full"; }

// ---------------------------------------------------------------------------
// FunctionalKind

FunctionalKind FunctionalKind::length() { return FunctionalKind(FunctionalTag::Length); }

FunctionalKind FunctionalKind::area(std::optional<WeightExpr> weight) {
  FunctionalKind k(FunctionalTag::Area);
  k.weight_ = std::move(weight);
  return k;
}

FunctionalKind FunctionalKind::orthogonality() { return FunctionalKind(FunctionalTag::Orthogonality); }

FunctionalKind FunctionalKind::combined(double k_area, double k_length, double k_ortho,
                                        std::optional<WeightExpr> weight) {
  if (!(k_area >= 0.0 && k_length >= 0.0 && k_ortho >= 0.0)) {
    throw PreconditionError("combined functional coefficients must be non-negative");
  }
  if (std::abs(k_area + k_length + k_ortho - 1.0) > 1e-12) {
    throw PreconditionError("combined functional coefficients must sum to 1, got " +
                            format_coefficient(k_area + k_length + k_ortho));
  }
  FunctionalKind k(FunctionalTag::Combined);
  k.k_area_ = k_area;
  k.k_length_ = k_length;
  k.k_ortho_ = k_ortho;
  k.weight_ = std::move(weight);
  return k;
}

FunctionalKind FunctionalKind::knupp() { return combined(0.5, 0.0, 0.5); }
FunctionalKind FunctionalKind::winslow() { return FunctionalKind(FunctionalTag::Winslow); }
FunctionalKind FunctionalKind::liao() { return FunctionalKind(FunctionalTag::Liao); }
FunctionalKind FunctionalKind::modified_liao() { return FunctionalKind(FunctionalTag::ModifiedLiao); }

bool FunctionalKind::uses_weight() const noexcept {
  if (!weight_) return false;
  return tag_ == FunctionalTag::Area || (tag_ == FunctionalTag::Combined && k_area_ > 0.0);
}

std::string FunctionalKind::name() const {
  switch (tag_) {
    case FunctionalTag::Length: return "length";
    case FunctionalTag::Area: return "area";
    case FunctionalTag::Orthogonality: return "ortho";
    case FunctionalTag::Combined:
      if (k_area_ == 0.5 && k_length_ == 0.0 && k_ortho_ == 0.5) return "knupp";
      return "combined:" + format_coefficient(k_area_) + "," + format_coefficient(k_length_) + "," +
             format_coefficient(k_ortho_);
    case FunctionalTag::Winslow: return "winslow";
    case FunctionalTag::Liao: return "liao";
    case FunctionalTag::ModifiedLiao: return "modliao";
  }
  return "?";
}

FunctionalKind parse_functional(std::string_view text, std::optional<WeightExpr> weight) {
  if (text == "length") return FunctionalKind::length();
  if (text == "area") return FunctionalKind::area(std::move(weight));
  if (text == "ortho") return FunctionalKind::orthogonality();
  if (text == "knupp") return FunctionalKind::combined(0.5, 0.0, 0.5, std::move(weight));
  if (text == "winslow") return FunctionalKind::winslow();
  if (text == "liao") return FunctionalKind::liao();
  if (text == "modliao") return FunctionalKind::modified_liao();

  constexpr std::string_view prefix = "combined:";
  if (text.substr(0, prefix.size()) == prefix) {
    std::array<double, 3> k{};
    const char* p = text.data() + prefix.size();
    const char* end = text.data() + text.size();
    for (std::size_t n = 0; n < k.size(); ++n) {
      auto [ptr, ec] = std::from_chars(p, end, k[n]);
      if (ec != std::errc{}) {
        throw PreconditionError("malformed combined coefficients in '" + std::string(text) + "'");
      }
      p = ptr;
      if (n + 1 < k.size()) {
        if (p == end || *p != ',') {
          throw PreconditionError("combined functional needs three comma-separated coefficients");
        }
        ++p;
      }
    }
    if (p != end) {
      throw PreconditionError("trailing characters in '" + std::string(text) + "'");
    }
    return FunctionalKind::combined(k[0], k[1], k[2], std::move(weight));
  }
  throw PreconditionError("unknown functional '" + std::string(text) +
                          "' (available: length, area, ortho, knupp, combined:kA,kL,kO, winslow, "
                          "liao, modliao)");
}

// ---------------------------------------------------------------------------
// Corner terms

double corner_length(const CornerFrame& f) noexcept { return f.g11() + f.g22(); }

double corner_area(const CornerFrame& f, double s) noexcept {
  const double det = f.det();
  return s * det * det;
}

double corner_ortho(const CornerFrame& f) noexcept {
  const double g12 = f.g12();
  return g12 * g12;
}

double corner_winslow(const CornerFrame& f) {
  const double det = f.det();
  if (!(det > 0.0)) throw_barrier("winslow", det);
  return (f.g11() + f.g22()) / det;
}

double corner_liao(const CornerFrame& f) noexcept {
  const double g11 = f.g11(), g22 = f.g22(), g12 = f.g12();
  return g11 * g11 + g22 * g22 + 2.0 * g12 * g12;
}

double corner_modliao(const CornerFrame& f) {
  const double det = f.det();
  const double gdet = f.gdet();
  if (!(det > 0.0) || !(gdet > 0.0)) throw_barrier("modliao", det);
  const double trace = f.g11() + f.g22();
  return trace * trace / gdet;
}

double corner_combined(const CornerFrame& f, double k_area, double k_length, double k_ortho,
                       double s) noexcept {
  return k_area * corner_area(f, s) + k_length * corner_length(f) + k_ortho * corner_ortho(f);
}

double corner_value(const CornerFrame& f, const FunctionalKind& kind, double s) {
  switch (kind.tag()) {
    case FunctionalTag::Length: return corner_length(f);
    case FunctionalTag::Area: return corner_area(f, s);
    case FunctionalTag::Orthogonality: return corner_ortho(f);
    case FunctionalTag::Combined:
      return corner_combined(f, kind.k_area(), kind.k_length(), kind.k_ortho(), s);
    case FunctionalTag::Winslow: return corner_winslow(f);
    case FunctionalTag::Liao: return corner_liao(f);
    case FunctionalTag::ModifiedLiao: return corner_modliao(f);
  }
  return 0.0;
}

CornerPartials corner_partials(const CornerFrame& f, const FunctionalKind& kind, double s) noexcept {
  switch (kind.tag()) {
    case FunctionalTag::Length: return length_partials(f);
    case FunctionalTag::Area: return area_partials(f, s);
    case FunctionalTag::Orthogonality: return ortho_partials(f);
    case FunctionalTag::Combined: {
      CornerPartials out;
      const auto accumulate = [&](double k, const CornerPartials& p) {
        if (k == 0.0) return;
        out.value += k * p.value;
        out.d_g1 += k * p.d_g1;
        out.d_g2 += k * p.d_g2;
      };
      accumulate(kind.k_area(), area_partials(f, s));
      accumulate(kind.k_length(), length_partials(f));
      accumulate(kind.k_ortho(), ortho_partials(f));
      return out;
    }
    case FunctionalTag::Winslow: {
      const double det = f.det();
      const double trace = f.g11() + f.g22();
      const double ratio = trace / (det * det);
      return {trace / det, (2.0 / det) * f.g1 - ratio * ddet_dg1(f),
              (2.0 / det) * f.g2 - ratio * ddet_dg2(f)};
    }
    case FunctionalTag::Liao: {
      const double g11 = f.g11(), g22 = f.g22(), g12 = f.g12();
      return {g11 * g11 + g22 * g22 + 2.0 * g12 * g12, 4.0 * g11 * f.g1 + 4.0 * g12 * f.g2,
              4.0 * g22 * f.g2 + 4.0 * g12 * f.g1};
    }
    case FunctionalTag::ModifiedLiao: {
      // (tr)^2 / det^2 differentiated through det; equal to tr^2 / gdet.
      const double det = f.det();
      const double trace = f.g11() + f.g22();
      const double a = 4.0 * trace / (det * det);
      const double b = 2.0 * trace * trace / (det * det * det);
      return {trace * trace / f.gdet(), a * f.g1 - b * ddet_dg1(f), a * f.g2 - b * ddet_dg2(f)};
    }
  }
  return {};
}

CornerTerm corner_term(const CornerFrame& f, const FunctionalKind& kind, double s) {
  const double value = corner_value(f, kind, s);  // throws on barrier violation
  const CornerPartials p = corner_partials(f, kind, s);
  const QuadrantStencil st = quadrant_stencil(f.quadrant);
  // The root is the tail (+1 when it is the head) of each difference.
  const double c1 = (st.xi_head == GridIndex{0, 0}) ? 1.0 : -1.0;
  const double c2 = (st.eta_head == GridIndex{0, 0}) ? 1.0 : -1.0;
  return {value, c1 * p.d_g1 + c2 * p.d_g2};
}

// ---------------------------------------------------------------------------
// Stencils and weights

TermList dependent_terms(const StructuredGrid& grid, GridIndex k, Stencil stencil) {
  if (!grid.is_interior(k)) {
    throw PreconditionError("local objective requires an interior node, got (" +
                            std::to_string(k.i) + ", " + std::to_string(k.j) + ")");
  }
  TermList terms;
  terms.push_back({k, Quadrant::NE, -1, -1});
  terms.push_back({k, Quadrant::NW, +1, -1});
  terms.push_back({k, Quadrant::SW, +1, +1});
  terms.push_back({k, Quadrant::SE, -1, +1});
  if (stencil == Stencil::Own) return terms;

  const GridIndex east{k.i + 1, k.j}, west{k.i - 1, k.j};
  const GridIndex north{k.i, k.j + 1}, south{k.i, k.j - 1};
  if (grid.is_interior(east)) {
    terms.push_back({east, Quadrant::NW, -1, 0});
    terms.push_back({east, Quadrant::SW, -1, 0});
  }
  if (grid.is_interior(west)) {
    terms.push_back({west, Quadrant::NE, +1, 0});
    terms.push_back({west, Quadrant::SE, +1, 0});
  }
  if (grid.is_interior(north)) {
    terms.push_back({north, Quadrant::SW, 0, -1});
    terms.push_back({north, Quadrant::SE, 0, -1});
  }
  if (grid.is_interior(south)) {
    terms.push_back({south, Quadrant::NW, 0, +1});
    terms.push_back({south, Quadrant::NE, 0, +1});
  }
  return terms;
}

Point2 corner_centroid(const StructuredGrid& grid, GridIndex root, Quadrant q) noexcept {
  const auto nb = quadrant_neighbours(root, q);
  return (1.0 / 3.0) * (grid.at(root) + grid.at(nb[0]) + grid.at(nb[1]));
}

CornerWeights CornerWeights::sample(const StructuredGrid& grid, const WeightExpr& weight) {
  CornerWeights w;
  w.ni_ = grid.ni();
  w.values_.assign(grid.size() * 4, 1.0);
  for_each_interior(grid, [&](GridIndex k) {
    for (Quadrant q : kQuadrants) {
      const double s = weight(corner_centroid(grid, k, q));
      if (s <= 0.0) ++w.nonpositive_;
      w.values_[grid.linear(k) * 4 + static_cast<int>(q)] = s;
    }
  });
  return w;
}

// ---------------------------------------------------------------------------
// Local objective

LocalObjective::LocalObjective(const StructuredGrid& grid, GridIndex k, const FunctionalKind& kind,
                               Stencil stencil, const CornerWeights* frozen)
    : grid_(grid),
      k_(k),
      kind_(kind),
      frozen_(frozen),
      terms_(dependent_terms(grid, k, stencil)),
      dependents_(stencil == Stencil::Full ? terms_ : dependent_terms(grid, k, Stencil::Full)) {}

CornerFrame dependent_frame(const StructuredGrid& grid, GridIndex k, const Point2& p,
                            const DependentTerm& t) noexcept {
  const auto pos = [&](GridIndex idx) -> const Point2& { return idx == k ? p : grid.at(idx); };
  const QuadrantStencil s = quadrant_stencil(t.quadrant);
  return {pos(shifted(t.root, s.xi_head)) - pos(shifted(t.root, s.xi_tail)),
          pos(shifted(t.root, s.eta_head)) - pos(shifted(t.root, s.eta_tail)), t.quadrant};
}

CornerFrame LocalObjective::frame(const DependentTerm& t, const Point2& p) const noexcept {
  return dependent_frame(grid_, k_, p, t);
}

double LocalObjective::weight(const DependentTerm& t, const Point2& p) const {
  if (!kind_.uses_weight()) return 1.0;
  if (frozen_ != nullptr) return frozen_->at(t.root, t.quadrant);
  const auto pos = [&](GridIndex idx) -> const Point2& { return idx == k_ ? p : grid_.at(idx); };
  const auto nb = quadrant_neighbours(t.root, t.quadrant);
  return (*kind_.weight())((1.0 / 3.0) * (pos(t.root) + pos(nb[0]) + pos(nb[1])));
}

std::optional<double> LocalObjective::value(const Point2& p) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    const CornerFrame f = frame(t, p);
    if (kind_.is_barrier() && !(f.det() > 0.0)) return std::nullopt;
    if (kind_.tag() == FunctionalTag::ModifiedLiao && !(f.gdet() > 0.0)) return std::nullopt;
    sum += corner_value(f, kind_, weight(t, p));
  }
  return sum;
}

std::optional<Vec2> LocalObjective::gradient(const Point2& p) const {
  Vec2 g;
  for (const auto& t : terms_) {
    const CornerFrame f = frame(t, p);
    if (kind_.is_barrier() && !(f.det() > 0.0)) return std::nullopt;
    const CornerPartials d = corner_partials(f, kind_, weight(t, p));
    g += static_cast<double>(t.c1) * d.d_g1 + static_cast<double>(t.c2) * d.d_g2;
  }
  return g;
}

double LocalObjective::min_dependent_det(const Point2& p) const noexcept {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& t : dependents_) m = std::min(m, frame(t, p).det());
  return m;
}

namespace {

[[noreturn]] void report_local_violation(const LocalObjective& obj, const GridIndex& k,
                                         const StructuredGrid& grid, const FunctionalKind& kind,
                                         Stencil stencil) {
  for (const auto& t : dependent_terms(grid, k, stencil)) {
    const double det = obj.frame(t, grid.at(k)).det();
    if (!(det > 0.0)) throw_barrier(kind.name().c_str(), det, t.root.i, t.root.j);
  }
  throw_barrier(kind.name().c_str(), 0.0, k.i, k.j);
}

}  // namespace

double local_value(const StructuredGrid& grid, GridIndex k, const FunctionalKind& kind,
                   Stencil stencil, const CornerWeights* frozen) {
  const LocalObjective obj(grid, k, kind, stencil, frozen);
  const auto v = obj.value(grid.at(k));
  if (!v) report_local_violation(obj, k, grid, kind, stencil);
  return *v;
}

Vec2 local_gradient(const StructuredGrid& grid, GridIndex k, const FunctionalKind& kind,
                    Stencil stencil, const CornerWeights* frozen) {
  const LocalObjective obj(grid, k, kind, stencil, frozen);
  const auto g = obj.gradient(grid.at(k));
  if (!g) report_local_violation(obj, k, grid, kind, stencil);
  return *g;
}

double global_value(const StructuredGrid& grid, const FunctionalKind& kind,
                    const CornerWeights* frozen) {
  const WeightExpr* live = (kind.uses_weight() && frozen == nullptr) ? kind.weight() : nullptr;
  double sum = 0.0;
  for_each_interior(grid, [&](GridIndex k) {
    for (Quadrant q : kQuadrants) {
      const CornerFrame f = corner_frame(grid, k, q);
      double s = 1.0;
      if (kind.uses_weight()) s = live ? (*live)(corner_centroid(grid, k, q)) : frozen->at(k, q);
      try {
        sum += corner_value(f, kind, s);
      } catch (const BarrierError&) {
        throw_barrier(kind.name().c_str(), f.det(), k.i, k.j);
      }
    }
  });
  return sum;
}

}  // namespace quadmesh
