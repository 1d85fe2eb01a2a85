#pragma once

// Spline-parameterized monopole design space.
//
// A design with L knots is the raw vector
//
//   x = [ X  l_f  l1  l2r  w1  o_r | g_1 .. g_L | r_1 .. r_L ]      (2L + 6 entries)
//
// where the first six entries are the topology parameters (mm, except the
// dimensionless l2r), g_l are relative ground-plane heights spanned
// equidistantly across the board width and r_l relative radiator radii at
// equidistant azimuth angles. Everything else (board height, radiator scale,
// radiator centre, extension stub length) is derived.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "strata/errors.hpp"
#include "strata/spline.hpp"

namespace strata {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Positions of the topology parameters inside a design vector.
enum CoreIndex : int {
  kBoardWidth = 0,     // X
  kFeedLength = 1,     // l_f
  kArmLength = 2,      // l1
  kStubRatio = 3,      // l2r, dimensionless
  kArmWidth = 4,       // w1
  kRadiatorOffset = 5  // o_r
};

inline constexpr int kCoreSize = 6;
inline constexpr double kFeedWidth = 1.8;  // mm, fixed for a 50 ohm feed line

inline constexpr int design_length(int knots) { return 2 * knots + kCoreSize; }

/// Raw design vector with its knot count.
class DesignVector {
 public:
  DesignVector() = default;

  DesignVector(Vector values, int knots) : values_(std::move(values)), knots_(knots) {
    if (knots_ < 1) throw StructuralError("knot count must be >= 1, got " + std::to_string(knots_));
    if (values_.size() != design_length(knots_)) {
      throw StructuralError("design vector with L=" + std::to_string(knots_) + " must have " +
                            std::to_string(design_length(knots_)) + " entries (2L+6), got " +
                            std::to_string(values_.size()));
    }
  }

  DesignVector(std::initializer_list<double> values, int knots)
      : DesignVector(Eigen::Map<const Vector>(values.begin(), static_cast<Eigen::Index>(values.size())),
                     knots) {}

  const Vector& values() const noexcept { return values_; }
  int knots() const noexcept { return knots_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_(i); }

 private:
  Vector values_;
  int knots_ = 0;
};

struct DesignParts {
  std::array<double, kCoreSize> core{};
  Vector ground;    // relative heights, L entries
  Vector radiator;  // relative radii, L entries
};

inline DesignParts split_vector(const DesignVector& x) {
  const int L = x.knots();
  if (x.size() != design_length(L)) {
    throw StructuralError("expected 2L+6 = " + std::to_string(design_length(L)) + " entries");
  }
  DesignParts parts;
  for (int i = 0; i < kCoreSize; ++i) parts.core[static_cast<std::size_t>(i)] = x[i];
  parts.ground = x.values().segment(kCoreSize, L);
  parts.radiator = x.values().segment(kCoreSize + L, L);
  return parts;
}

inline DesignVector join_vector(const std::array<double, kCoreSize>& core, const Vector& ground,
                                const Vector& radiator) {
  if (ground.size() != radiator.size()) {
    throw StructuralError("ground and radiator knot vectors differ in length");
  }
  const auto L = static_cast<int>(ground.size());
  Vector v(design_length(L));
  for (int i = 0; i < kCoreSize; ++i) v(i) = core[static_cast<std::size_t>(i)];
  v.segment(kCoreSize, L) = ground;
  v.segment(kCoreSize + L, L) = radiator;
  return DesignVector(std::move(v), L);
}

/// Lengths in mm. Symbols refer to the labels of the monopole drawing.
struct DerivedParams {
  double width = 0;           // X, board width
  double height = 0;          // Y = l1 + w1, board height
  double stub_length = 0;     // l2 = (X - w1) * l2r
  double feed_relief = 0;     // l_fr = min(X, Y - l_f) / 2; exported, drives no geometry
  double radiator_scale = 0;  // S = min(X - o_r, Y - l_f) / 2
  double radiator_x = 0;      // o = X / 2 + o_r
  double feed_width = kFeedWidth;
  double feed_length = 0;     // l_f
  double arm_length = 0;      // l1
  double arm_width = 0;       // w1
};

inline DerivedParams derive_params(std::span<const double, kCoreSize> core) {
  const double X = core[kBoardWidth];
  const double lf = core[kFeedLength];
  const double l1 = core[kArmLength];
  const double l2r = core[kStubRatio];
  const double w1 = core[kArmWidth];
  const double orr = core[kRadiatorOffset];

  DerivedParams p;
  p.width = X;
  p.height = l1 + w1;
  p.stub_length = (X - w1) * l2r;
  p.feed_relief = std::min(X, p.height - lf) / 2.0;
  p.radiator_scale = std::min(X - orr, p.height - lf) / 2.0;
  p.radiator_x = 0.5 * X + orr;
  p.feed_length = lf;
  p.arm_length = l1;
  p.arm_width = w1;

  if (!(p.height > lf)) {
    throw InfeasibleGeometry("board height Y = l1 + w1 must exceed feed length l_f (Y - l_f = " +
                                 std::to_string(p.height - lf) + ")",
                             p.height - lf);
  }
  if (!(p.radiator_scale > 0.0)) {
    throw InfeasibleGeometry(
        "radiator scale S must be positive (S = " + std::to_string(p.radiator_scale) + ")",
        p.radiator_scale);
  }
  return p;
}

inline DerivedParams derive_params(const std::array<double, kCoreSize>& core) {
  return derive_params(std::span<const double, kCoreSize>(core));
}

inline DerivedParams derive_params(const DesignVector& x) { return derive_params(split_vector(x).core); }

// ---------------------------------------------------------------------------
// Bounds and normalization

struct DesignBounds {
  Vector lower;
  Vector upper;

  void validate() const {
    if (lower.size() != upper.size() || lower.size() == 0) {
      throw StructuralError("bounds must be non-empty and of equal length");
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      if (!(lower(i) < upper(i))) {
        throw ArgumentError("bounds require lower < upper at coordinate " + std::to_string(i));
      }
    }
  }
};

inline constexpr double kGroundKnotLower = 0.2;
inline constexpr double kGroundKnotUpper = 0.8;
inline constexpr double kRadiatorKnotLower = 0.1;
inline constexpr double kRadiatorKnotUpper = 1.0;

inline DesignBounds default_bounds(int knots) {
  if (knots < 1) throw ArgumentError("knot count must be >= 1, got " + std::to_string(knots));
  const Eigen::Index L = knots;
  DesignBounds b{Vector(design_length(knots)), Vector(design_length(knots))};
  b.lower.head(kCoreSize) << 6, 4, 10, 0.05, 0.5, -1;
  b.upper.head(kCoreSize) << 30, 15, 30, 1, 2.5, 1;
  b.lower.segment(kCoreSize, L).setConstant(kGroundKnotLower);
  b.upper.segment(kCoreSize, L).setConstant(kGroundKnotUpper);
  b.lower.segment(kCoreSize + L, L).setConstant(kRadiatorKnotLower);
  b.upper.segment(kCoreSize + L, L).setConstant(kRadiatorKnotUpper);
  return b;
}

inline constexpr double kBoundsTolerance = 1e-12;

/// Indices of coordinates outside [lower - tol, upper + tol].
inline std::vector<Eigen::Index> bound_violations(const Vector& x, const DesignBounds& b,
                                                  double tol = kBoundsTolerance) {
  if (x.size() != b.lower.size()) {
    throw StructuralError("vector of length " + std::to_string(x.size()) +
                          " does not match bounds of length " + std::to_string(b.lower.size()));
  }
  std::vector<Eigen::Index> bad;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) >= b.lower(i) - tol && x(i) <= b.upper(i) + tol)) bad.push_back(i);
  }
  return bad;
}

inline void require_in_bounds(const Vector& x, const DesignBounds& b) {
  const auto bad = bound_violations(x, b);
  if (bad.empty()) return;
  std::ostringstream os;
  os << "design outside bounds at coordinate(s):";
  for (auto i : bad) os << " [" << i << "]=" << x(i) << " not in [" << b.lower(i) << ", " << b.upper(i) << "]";
  throw OutOfBounds(os.str());
}

inline Vector normalize(const Vector& x, const DesignBounds& b) {
  b.validate();
  require_in_bounds(x, b);
  Vector u = ((x - b.lower).array() / (b.upper - b.lower).array()).matrix();
  return u.cwiseMax(0.0).cwiseMin(1.0);
}

inline Vector normalize(const DesignVector& x, const DesignBounds& b) { return normalize(x.values(), b); }

inline Vector denormalize(const Vector& u, const DesignBounds& b) {
  b.validate();
  if (u.size() != b.lower.size()) throw StructuralError("normalized vector length does not match bounds");
  return (b.lower.array() + u.array() * (b.upper - b.lower).array()).matrix();
}

// ---------------------------------------------------------------------------
// Outlines

struct Point2 {
  double x = 0;
  double y = 0;
};

struct Outline {
  std::vector<Point2> points;
  bool closed = false;

  double perimeter() const {
    double len = 0;
    const std::size_t n = points.size();
    if (n < 2) return 0;
    for (std::size_t i = 0; i + 1 < n; ++i) len += std::hypot(points[i + 1].x - points[i].x, points[i + 1].y - points[i].y);
    if (closed) len += std::hypot(points[0].x - points[n - 1].x, points[0].y - points[n - 1].y);
    return len;
  }

  /// Shoelace area (absolute value); zero for open outlines.
  double area() const {
    if (!closed || points.size() < 3) return 0;
    double twice = 0;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = points[i];
      const auto& b = points[(i + 1) % n];
      twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) / 2.0;
  }
};

namespace detail {

inline double orient(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

// Orientation sign with roundoff treated as collinear; sampled straight
// edges otherwise look like crossings.
inline int orient_sign(const Point2& a, const Point2& b, const Point2& c) {
  const double v = orient(a, b, c);
  const double tol = 1e-12 * std::hypot(b.x - a.x, b.y - a.y) * std::hypot(c.x - a.x, c.y - a.y);
  return v > tol ? 1 : (v < -tol ? -1 : 0);
}

inline bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  const int d1 = orient_sign(q1, q2, p1);
  const int d2 = orient_sign(q1, q2, p2);
  const int d3 = orient_sign(p1, p2, q1);
  const int d4 = orient_sign(p1, p2, q2);
  if (d1 != d2 && d3 != d4 && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0) return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace detail

/// True iff no two non-adjacent edges of the polyline/polygon intersect.
inline bool is_simple(const Outline& o) {
  const std::size_t n = o.points.size();
  if (n < 3) return true;
  const std::size_t edges = o.closed ? n : n - 1;
  auto end_of = [&](std::size_t e) { return o.points[(e + 1) % n]; };
  for (std::size_t i = 0; i < edges; ++i) {
    for (std::size_t j = i + 1; j < edges; ++j) {
      const bool adjacent = (j == i + 1) || (o.closed && i == 0 && j == edges - 1);
      if (adjacent) continue;
      if (detail::segments_intersect(o.points[i], end_of(i), o.points[j], end_of(j))) return false;
    }
  }
  if (o.closed && o.area() <= 0) return false;
  return true;
}

inline std::size_t min_outline_samples(int knots) {
  return static_cast<std::size_t>(std::max(16, 4 * knots));
}

/// Closed radiator curve: periodic cubic spline of the radii S * r_l at the
/// azimuths 2*pi*(l-1)/L, centred at x = o and lifted so that its lowest
/// point sits on top of the feed line (y = l_f). Cubic interpolation can
/// undershoot between a large and a small knot, so the sampled radius is
/// floored at half the smallest knot radius; the curve stays radial.
inline Outline radiator_outline(const DerivedParams& p, const Vector& radii_rel, std::size_t samples) {
  const auto L = static_cast<int>(radii_rel.size());
  if (L < 1) throw ArgumentError("radiator needs at least one knot");
  if (samples < min_outline_samples(L)) {
    throw ArgumentError("radiator outline needs at least " + std::to_string(min_outline_samples(L)) + " samples");
  }
  std::vector<double> radii(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    radii[static_cast<std::size_t>(l)] = p.radiator_scale * radii_rel(l);
    if (!(radii[static_cast<std::size_t>(l)] > 0.0)) {
      throw InfeasibleGeometry("radiator knot radius must be positive", radii[static_cast<std::size_t>(l)]);
    }
  }
  const PeriodicCubicSpline r(radii, 2.0 * std::numbers::pi);
  const double floor_r = 0.5 * *std::min_element(radii.begin(), radii.end());

  Outline out;
  out.closed = true;
  out.points.resize(samples);
  double lowest = 0;
  for (std::size_t j = 0; j < samples; ++j) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(samples);
    const double rj = std::max(r(theta), floor_r);
    out.points[j] = {rj * std::cos(theta), rj * std::sin(theta)};
    lowest = std::min(lowest, out.points[j].y);
  }
  const double cy = p.feed_length - lowest;
  for (auto& pt : out.points) {
    pt.x += p.radiator_x;
    pt.y += cy;
  }
  return out;
}

/// Top edge of the ground plane: natural cubic spline of Y * g_l at the
/// abscissae X*(l-1)/(L-1); constant for a single knot.
inline Outline ground_outline(const DerivedParams& p, const Vector& heights_rel, std::size_t samples) {
  const auto L = static_cast<int>(heights_rel.size());
  if (L < 1) throw ArgumentError("ground profile needs at least one knot");
  if (samples < min_outline_samples(L)) {
    throw ArgumentError("ground outline needs at least " + std::to_string(min_outline_samples(L)) + " samples");
  }
  std::vector<double> xs(static_cast<std::size_t>(L)), ys(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    xs[static_cast<std::size_t>(l)] = L == 1 ? 0.0 : p.width * l / (L - 1);
    ys[static_cast<std::size_t>(l)] = p.height * heights_rel(l);
  }
  const NaturalCubicSpline g(xs, ys);
  Outline out;
  out.closed = false;
  out.points.resize(samples);
  for (std::size_t j = 0; j < samples; ++j) {
    const double x = p.width * static_cast<double>(j) / static_cast<double>(samples - 1);
    out.points[j] = {x, g(x)};
  }
  return out;
}

enum class FootprintConvention { BoundingBox, RadiatorHeight };

/// Footprint in mm^2: X*Y (bounding box, the default) or S*Y.
inline double footprint(const DerivedParams& p, FootprintConvention c = FootprintConvention::BoundingBox) {
  return c == FootprintConvention::BoundingBox ? p.width * p.height : p.radiator_scale * p.height;
}

/// Footprint straight from the raw vector, without the feasibility checks
/// of derive_params (X and Y are always defined).
inline double footprint(const DesignVector& x, FootprintConvention c = FootprintConvention::BoundingBox) {
  const double X = x[kBoardWidth];
  const double Y = x[kArmLength] + x[kArmWidth];
  if (c == FootprintConvention::BoundingBox) return X * Y;
  return std::min(X - x[kRadiatorOffset], Y - x[kFeedLength]) / 2.0 * Y;
}

struct GeometryFeatures {
  double perimeter = 0;           // radiator, mm
  double enclosed_area = 0;       // radiator, mm^2
  double mean_ground_height = 0;  // Y * mean(g), mm
  double feed_length = 0;         // l_f, mm
  double bounding_area = 0;       // X * Y, mm^2
};

struct GeometryModel {
  DerivedParams params;
  Outline radiator;
  Outline ground_profile;
  Outline feed;
  Outline extension;
  GeometryFeatures features;
};

inline constexpr std::size_t kDefaultOutlineSamples = 256;

inline GeometryModel build_geometry(const DesignVector& x, const DesignBounds& bounds,
                                    std::size_t samples = kDefaultOutlineSamples) {
  require_in_bounds(x.values(), bounds);
  const DesignParts parts = split_vector(x);
  GeometryModel g;
  g.params = derive_params(parts.core);
  const auto& p = g.params;
  const std::size_t n = std::max(samples, min_outline_samples(x.knots()));
  g.radiator = radiator_outline(p, parts.radiator, n);
  g.ground_profile = ground_outline(p, parts.ground, n);

  const double half = p.feed_width / 2.0;
  g.feed.closed = true;
  g.feed.points = {{p.radiator_x - half, 0.0},
                   {p.radiator_x + half, 0.0},
                   {p.radiator_x + half, p.feed_length},
                   {p.radiator_x - half, p.feed_length}};

  // L-shaped extension at the right board edge: a vertical arm of w1 x l1
  // topped by a horizontal stub of (w1 + l2) x w1 reaching y = Y.
  const double X = p.width;
  const double Y = p.height;
  const double inner = X - p.arm_width;
  g.extension.closed = true;
  g.extension.points = {{X, 0.0},
                        {X, Y},
                        {inner - p.stub_length, Y},
                        {inner - p.stub_length, p.arm_length},
                        {inner, p.arm_length},
                        {inner, 0.0}};

  g.features.perimeter = g.radiator.perimeter();
  g.features.enclosed_area = g.radiator.area();
  g.features.mean_ground_height = p.height * parts.ground.mean();
  g.features.feed_length = p.feed_length;
  g.features.bounding_area = X * Y;
  return g;
}

inline GeometryModel build_geometry(const DesignVector& x, std::size_t samples = kDefaultOutlineSamples) {
  return build_geometry(x, default_bounds(x.knots()), samples);
}

// ---------------------------------------------------------------------------
// Knot resampling

enum class KnotKind { Open, Periodic };

/// Resample a knot vector onto `target` equidistant sites of the same layout,
/// clipped into the knot bounds of its kind.
inline Vector interpolate_knots(const Vector& knots, int target, KnotKind kind) {
  const auto L = static_cast<int>(knots.size());
  if (L < 1 || target < 1) throw ArgumentError("knot interpolation needs L >= 1 and L' >= 1");
  const std::vector<double> ys(knots.data(), knots.data() + L);
  Vector out(target);
  if (kind == KnotKind::Open) {
    std::vector<double> xs(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) xs[static_cast<std::size_t>(l)] = L == 1 ? 0.0 : static_cast<double>(l) / (L - 1);
    const NaturalCubicSpline s(xs, ys);
    for (int l = 0; l < target; ++l) {
      const double t = target == 1 ? 0.5 : static_cast<double>(l) / (target - 1);
      out(l) = std::clamp(s(t), kGroundKnotLower, kGroundKnotUpper);
    }
  } else {
    const PeriodicCubicSpline s(ys, 1.0);
    for (int l = 0; l < target; ++l) {
      out(l) = std::clamp(s(static_cast<double>(l) / target), kRadiatorKnotLower, kRadiatorKnotUpper);
    }
  }
  return out;
}

}  // namespace strata
