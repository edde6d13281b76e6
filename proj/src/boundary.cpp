#include "quadmesh/boundary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "quadmesh/error.hpp"

namespace quadmesh {

namespace {

constexpr double kPi = std::numbers::pi;

// Horseshoe: semi-annulus between these radii, closed at both tips by
// circular caps that bulge below the x axis by kCapSagitta.
constexpr double kHorseshoeInner = 0.3;
constexpr double kHorseshoeOuter = 1.0;
constexpr double kCapSagitta = 0.25;

// c_channel: unit square minus the disk through (1,0), (1,1) and the deepest
// point (1 - kChannelDepth, 0.5).
constexpr double kChannelDepth = 0.6;

constexpr std::array<std::string_view, 4> kDomainNames{"square", "quarter_annulus", "horseshoe",
                                                       "c_channel"};

Point2 polar(Point2 centre, double r, double theta) {
  return {centre.x + r * std::cos(theta), centre.y + r * std::sin(theta)};
}

BoundaryCurve sample_arc(Point2 centre, double r, double theta0, double theta1, int n,
                         Point2 start, Point2 end) {
  return sample_curve([&](double t) { return polar(centre, r, theta0 + t * (theta1 - theta0)); },
                      n, start, end);
}

bool corners_match(const Point2& a, const Point2& b) {
  const double scale = std::max({1.0, std::abs(a.x), std::abs(a.y)});
  return std::abs(a.x - b.x) <= 1e-12 * scale && std::abs(a.y - b.y) <= 1e-12 * scale;
}

DomainSpec make_square(int ni, int nj) {
  const Point2 p00{0, 0}, p10{1, 0}, p01{0, 1}, p11{1, 1};
  return {"square", sample_segment(p00, p10, ni), sample_segment(p01, p11, ni),
          sample_segment(p00, p01, nj), sample_segment(p10, p11, nj)};
}

// xi runs clockwise along the arcs so that the frames are positively oriented.
DomainSpec make_quarter_annulus(int ni, int nj) {
  const Point2 p00{0, 0.5}, p10{0.5, 0}, p01{0, 1}, p11{1, 0};
  return {"quarter_annulus", sample_arc({0, 0}, 0.5, kPi / 2, 0, ni, p00, p10),
          sample_arc({0, 0}, 1.0, kPi / 2, 0, ni, p01, p11), sample_segment(p00, p01, nj),
          sample_segment(p10, p11, nj)};
}

DomainSpec make_horseshoe(int ni, int nj) {
  const double ri = kHorseshoeInner, ro = kHorseshoeOuter;
  const Point2 p00{-ri, 0}, p10{ri, 0}, p01{-ro, 0}, p11{ro, 0};

  const double half_chord = (ro - ri) / 2;
  const double radius = (half_chord * half_chord + kCapSagitta * kCapSagitta) / (2 * kCapSagitta);
  const double lift = radius - kCapSagitta;
  const double mid = (ro + ri) / 2;
  // Angle of the inner end of the right cap seen from the cap centre.
  const double a0 = std::atan2(-lift, -half_chord);
  const double a1 = std::atan2(-lift, half_chord);

  return {"horseshoe", sample_arc({0, 0}, ri, kPi, 0, ni, p00, p10),
          sample_arc({0, 0}, ro, kPi, 0, ni, p01, p11),
          // Left cap mirrors the right one: from (-ri,0) down and out to (-ro,0).
          sample_arc({-mid, lift}, radius, a1, a0, nj, p00, p01),
          sample_arc({mid, lift}, radius, a0, a1, nj, p10, p11)};
}

DomainSpec make_c_channel(int ni, int nj) {
  const double radius = ((1 - 0.5) * (1 - 0.5) + kChannelDepth * kChannelDepth) / (2 * kChannelDepth);
  const Point2 centre{1 - kChannelDepth + radius, 0.5};
  // The disk reaches below y = 0, so the bottom and top edges end where
  // they meet it.
  const double tip = centre.x - std::sqrt(radius * radius - 0.25);
  const Point2 p00{0, 0}, p10{tip, 0}, p01{0, 1}, p11{tip, 1};
  const double a0 = std::atan2(-0.5, tip - centre.x);
  const double a1 = std::atan2(0.5, tip - centre.x) - 2 * kPi;
  return {"c_channel", sample_segment(p00, p10, ni), sample_segment(p01, p11, ni),
          sample_segment(p00, p01, nj), sample_arc(centre, radius, a0, a1, nj, p10, p11)};
}

}  // namespace

BoundaryCurve::BoundaryCurve(std::vector<Point2> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw DomainError("boundary curve needs at least 2 points");
  for (const auto& p : points_) {
    if (!is_finite(p)) throw DomainError("boundary curve has a non-finite point");
  }
}

BoundaryCurve sample_curve(const std::function<Point2(double)>& curve, int n, Point2 start,
                           Point2 end) {
  if (n < 2) throw DomainError("boundary curve needs at least 2 points");
  std::vector<Point2> pts(static_cast<std::size_t>(n));
  pts.front() = start;
  pts.back() = end;
  for (int k = 1; k < n - 1; ++k) pts[k] = curve(static_cast<double>(k) / (n - 1));
  return BoundaryCurve(std::move(pts));
}

BoundaryCurve sample_segment(Point2 a, Point2 b, int n) {
  return sample_curve([&](double t) { return a + t * (b - a); }, n, a, b);
}

void validate(const DomainSpec& d) {
  if (d.top.size() != d.bottom.size()) {
    throw DomainError("bottom and top curves differ in length (" + std::to_string(d.bottom.size()) +
                      " vs " + std::to_string(d.top.size()) + ")");
  }
  if (d.right.size() != d.left.size()) {
    throw DomainError("left and right curves differ in length (" + std::to_string(d.left.size()) +
                      " vs " + std::to_string(d.right.size()) + ")");
  }
  struct Pair {
    const Point2& a;
    const Point2& b;
    const char* name;
  };
  const Pair corners[] = {{d.bottom.front(), d.left.front(), "bottom-left"},
                          {d.bottom.back(), d.right.front(), "bottom-right"},
                          {d.top.front(), d.left.back(), "top-left"},
                          {d.top.back(), d.right.back(), "top-right"}};
  for (const auto& c : corners) {
    if (!corners_match(c.a, c.b)) {
      throw DomainError(std::string("corner mismatch at ") + c.name + " in domain '" + d.name + "'");
    }
  }
}

StructuredGrid tfi_init(const DomainSpec& d) {
  validate(d);
  const int ni = d.ni(), nj = d.nj();
  StructuredGrid grid(ni, nj);

  const Point2 p00 = d.bottom.front(), p10 = d.bottom.back();
  const Point2 p01 = d.top.front(), p11 = d.top.back();
  for (int j = 1; j < nj - 1; ++j) {
    const double eta = static_cast<double>(j) / (nj - 1);
    for (int i = 1; i < ni - 1; ++i) {
      const double xi = static_cast<double>(i) / (ni - 1);
      const Point2 blend = (1 - eta) * d.bottom[i] + eta * d.top[i] + (1 - xi) * d.left[j] +
                           xi * d.right[j];
      const Point2 bilinear = (1 - xi) * (1 - eta) * p00 + xi * (1 - eta) * p10 +
                              (1 - xi) * eta * p01 + xi * eta * p11;
      grid(i, j) = blend - bilinear;
    }
  }
  for (int i = 0; i < ni; ++i) {
    grid(i, 0) = d.bottom[i];
    grid(i, nj - 1) = d.top[i];
  }
  // Corners come from the bottom/top curves; validate() has checked that the
  // side curves agree with them.
  for (int j = 1; j < nj - 1; ++j) {
    grid(0, j) = d.left[j];
    grid(ni - 1, j) = d.right[j];
  }
  return grid;
}

DomainSpec builtin_domain(std::string_view name, int ni, int nj) {
  if (ni < 2 || nj < 2) {
    throw DomainError("domain resolution must be at least 2x2, got " + std::to_string(ni) + "x" +
                      std::to_string(nj));
  }
  if (name == "square") return make_square(ni, nj);
  if (name == "quarter_annulus") return make_quarter_annulus(ni, nj);
  if (name == "horseshoe") return make_horseshoe(ni, nj);
  if (name == "c_channel") return make_c_channel(ni, nj);
  std::string known;
  for (auto n : kDomainNames) known += (known.empty() ? "" : ", ") + std::string(n);
  throw DomainError("unknown domain '" + std::string(name) + "' (available: " + known + ")");
}

std::span<const std::string_view> builtin_domain_names() noexcept { return kDomainNames; }

}  // namespace quadmesh
