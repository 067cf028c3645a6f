#pragma once

#include <functional>
#include <vector>

#include "perdeg/common.hpp"

namespace perdeg {

using PlanarMap = std::function<Point2(const Point2&)>;

/// CCW marks an outer boundary, CW a hole. Parametrizations are always traced
/// counterclockwise; a CW tag negates the curve's contribution.
enum class Orientation { CCW, CW };

struct BoundaryCurve {
  std::function<Point2(double)> param;  // theta in [0, 1), closed at theta = 1
  Orientation orientation = Orientation::CCW;
  int samples = 256;

  [[nodiscard]] Point2 operator()(double theta) const { return param(theta); }
  [[nodiscard]] double theta(int k) const { return static_cast<double>(k) / samples; }
  [[nodiscard]] std::vector<Point2> sample_points() const;
  /// Pointwise scaling about the origin.
  [[nodiscard]] BoundaryCurve scaled(double factor) const;
  [[nodiscard]] BoundaryCurve with_samples(int m) const;

  static BoundaryCurve circle(const Point2& center, double radius, Orientation orientation = Orientation::CCW,
                              int samples = 256);
  /// Closed polygon through the given vertices, traversed in order; the
  /// vertices must run counterclockwise.
  static BoundaryCurve polygon(std::vector<Point2> vertices, Orientation orientation = Orientation::CCW,
                               int samples = 256);
};

struct PlanarRegion {
  BoundaryCurve outer;
  std::vector<BoundaryCurve> holes;

  static PlanarRegion disc(const Point2& center, double radius, int samples = 256);
  static PlanarRegion annulus(const Point2& center, double r_in, double r_out, int samples = 256);

  [[nodiscard]] std::vector<const BoundaryCurve*> curves() const;
  [[nodiscard]] PlanarRegion scaled(double factor) const;
  [[nodiscard]] PlanarRegion with_samples(int m) const;
  /// Mean of the outer boundary samples.
  [[nodiscard]] Point2 centroid() const;
  /// Throws std::invalid_argument when a hole is not strictly inside the outer
  /// curve or a sampled curve self-intersects.
  void validate() const;
  /// Winding-based membership: interior of the outer curve, outside every hole.
  [[nodiscard]] bool contains(const Point2& p) const;
  /// Membership in the closure (points within `slack` of a boundary count).
  [[nodiscard]] bool closure_contains(const Point2& p, double slack = 1e-9) const;
  /// Smallest distance from p to the sampled boundary polylines.
  [[nodiscard]] double boundary_distance(const Point2& p) const;
};

struct WindingResult {
  int winding = 0;  // oriented: CW curves report the negated count
  double margin = 0.0;
  int samples_used = 0;
  int refinements = 0;
};

struct DegreeResult {
  int degree = 0;
  double boundary_margin = 0.0;
  int samples_used = 0;
  int refinements = 0;
};

inline constexpr double kZeroMargin = 1e-12;
inline constexpr int kMaxRefinementDepth = 20;

/// Argument increment of map o curve, with any segment whose angle step
/// exceeds pi/2 bisected (up to 20 levels). Base samples are evaluated
/// concurrently.
[[nodiscard]] WindingResult boundary_winding(const PlanarMap& map, const BoundaryCurve& curve);

/// Sum of oriented windings over all boundary curves.
[[nodiscard]] DegreeResult region_degree(const PlanarMap& map, const PlanarRegion& region);

/// Winding number of a sampled closed polyline around p (no orientation sign).
[[nodiscard]] int polyline_winding(const std::vector<Point2>& polyline, const Point2& p);

}  // namespace perdeg
