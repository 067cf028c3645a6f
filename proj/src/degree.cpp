#include "perdeg/degree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace perdeg {

namespace {

constexpr int kMembershipSamples = 4096;

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double u = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return (p - (a + u * ab)).norm();
}

bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

struct Accumulator {
  const PlanarMap& map;
  const BoundaryCurve& curve;
  double margin = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  int refinements = 0;

  Point2 eval(double theta) {
    const Point2 v = map(curve(theta));
    note(v);
    return v;
  }

  void note(const Point2& v) {
    ++evaluations;
    const double r = v.norm();
    if (!std::isfinite(r)) {
      throw NonFiniteState("boundary_winding: non-finite map value");
    }
    margin = std::min(margin, r);
    if (margin < kZeroMargin) {
      throw ZeroOnBoundary("boundary_winding: map vanishes on the boundary");
    }
  }

  double segment(double ta, const Point2& va, double tb, const Point2& vb, int depth) {
    const double step = std::atan2(cross(va, vb), va.dot(vb));
    if (std::abs(step) <= 0.5 * kPi) {
      return step;
    }
    if (depth >= kMaxRefinementDepth) {
      throw RefinementExhausted("boundary_winding: angle step above pi/2 at maximum refinement depth");
    }
    ++refinements;
    const double tm = 0.5 * (ta + tb);
    const Point2 vm = eval(tm);
    return segment(ta, va, tm, vm, depth + 1) + segment(tm, vm, tb, vb, depth + 1);
  }
};

}  // namespace

std::vector<Point2> BoundaryCurve::sample_points() const {
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    pts.push_back(param(theta(k)));
  }
  return pts;
}

BoundaryCurve BoundaryCurve::scaled(double factor) const {
  BoundaryCurve out = *this;
  auto base = param;
  out.param = [base, factor](double theta) -> Point2 { return factor * base(theta); };
  return out;
}

BoundaryCurve BoundaryCurve::with_samples(int m) const {
  BoundaryCurve out = *this;
  out.samples = m;
  return out;
}

BoundaryCurve BoundaryCurve::circle(const Point2& center, double radius, Orientation orientation, int samples) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("circle radius must be positive");
  }
  BoundaryCurve c;
  c.param = [center, radius](double theta) -> Point2 {
    const double a = 2.0 * kPi * theta;
    return center + radius * Point2(std::cos(a), std::sin(a));
  };
  c.orientation = orientation;
  c.samples = samples;
  return c;
}

BoundaryCurve BoundaryCurve::polygon(std::vector<Point2> vertices, Orientation orientation, int samples) {
  if (vertices.size() < 3) {
    throw std::invalid_argument("polygon needs at least three vertices");
  }
  double area2 = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    area2 += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
  }
  if (area2 <= 0.0) {
    throw std::invalid_argument("polygon vertices must run counterclockwise");
  }
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    cumulative.push_back(cumulative.back() + (vertices[(i + 1) % vertices.size()] - vertices[i]).norm());
  }
  const double perimeter = cumulative.back();
  BoundaryCurve c;
  c.param = [vertices, cumulative, perimeter](double theta) -> Point2 {
    double s = std::fmod(theta, 1.0);
    if (s < 0.0) {
      s += 1.0;
    }
    s *= perimeter;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    std::size_t i = it == cumulative.begin() ? 0 : static_cast<std::size_t>(it - cumulative.begin()) - 1;
    i = std::min(i, vertices.size() - 1);
    const double len = cumulative[i + 1] - cumulative[i];
    const double u = len > 0.0 ? (s - cumulative[i]) / len : 0.0;
    return vertices[i] + u * (vertices[(i + 1) % vertices.size()] - vertices[i]);
  };
  c.orientation = orientation;
  c.samples = samples;
  return c;
}

PlanarRegion PlanarRegion::disc(const Point2& center, double radius, int samples) {
  return PlanarRegion{BoundaryCurve::circle(center, radius, Orientation::CCW, samples), {}};
}

PlanarRegion PlanarRegion::annulus(const Point2& center, double r_in, double r_out, int samples) {
  if (!(r_in > 0.0) || !(r_in < r_out)) {
    throw std::invalid_argument("annulus needs 0 < r_in < r_out");
  }
  return PlanarRegion{BoundaryCurve::circle(center, r_out, Orientation::CCW, samples),
                      {BoundaryCurve::circle(center, r_in, Orientation::CW, samples)}};
}

std::vector<const BoundaryCurve*> PlanarRegion::curves() const {
  std::vector<const BoundaryCurve*> out{&outer};
  for (const auto& h : holes) {
    out.push_back(&h);
  }
  return out;
}

PlanarRegion PlanarRegion::scaled(double factor) const {
  PlanarRegion out{outer.scaled(factor), {}};
  for (const auto& h : holes) {
    out.holes.push_back(h.scaled(factor));
  }
  return out;
}

PlanarRegion PlanarRegion::with_samples(int m) const {
  PlanarRegion out{outer.with_samples(m), {}};
  for (const auto& h : holes) {
    out.holes.push_back(h.with_samples(m));
  }
  return out;
}

Point2 PlanarRegion::centroid() const {
  Point2 sum = Point2::Zero();
  const auto pts = outer.sample_points();
  for (const auto& p : pts) {
    sum += p;
  }
  return sum / static_cast<double>(pts.size());
}

void PlanarRegion::validate() const {
  for (const BoundaryCurve* c : curves()) {
    if (c->samples < 3) {
      throw std::invalid_argument("boundary curve needs at least three samples");
    }
    const auto pts = c->sample_points();
    const double closure_gap = (c->param(1.0) - c->param(0.0)).norm();
    double scale = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      scale = std::max(scale, (pts[(i + 1) % pts.size()] - pts[i]).norm());
    }
    if (closure_gap > scale) {
      throw std::invalid_argument("boundary curve is not closed at sample resolution");
    }
    const std::size_t m = pts.size();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 2; j < m; ++j) {
        if (i == 0 && j == m - 1) {
          continue;
        }
        if (segments_intersect(pts[i], pts[(i + 1) % m], pts[j], pts[(j + 1) % m])) {
          throw std::invalid_argument("boundary curve self-intersects at sample resolution");
        }
      }
    }
  }
  const auto outer_pts = outer.sample_points();
  for (const auto& h : holes) {
    for (const auto& p : h.sample_points()) {
      if (polyline_winding(outer_pts, p) == 0) {
        throw std::invalid_argument("hole is not strictly inside the outer boundary");
      }
    }
  }
}

int polyline_winding(const std::vector<Point2>& poly, const Point2& p) {
  int wn = 0;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % m];
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && cross(b - a, p - a) > 0.0) {
        ++wn;
      }
    } else if (b.y() <= p.y() && cross(b - a, p - a) < 0.0) {
      --wn;
    }
  }
  return wn;
}

bool PlanarRegion::contains(const Point2& p) const {
  const int m = std::max(outer.samples, kMembershipSamples);
  if (polyline_winding(outer.with_samples(m).sample_points(), p) == 0) {
    return false;
  }
  for (const auto& h : holes) {
    const int mh = std::max(h.samples, kMembershipSamples);
    if (polyline_winding(h.with_samples(mh).sample_points(), p) != 0) {
      return false;
    }
  }
  return true;
}

bool PlanarRegion::closure_contains(const Point2& p, double slack) const {
  return contains(p) || boundary_distance(p) <= slack;
}

double PlanarRegion::boundary_distance(const Point2& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const BoundaryCurve* c : curves()) {
    const auto pts = c->with_samples(std::max(c->samples, kMembershipSamples)).sample_points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      best = std::min(best, segment_distance(p, pts[i], pts[(i + 1) % pts.size()]));
    }
  }
  return best;
}

WindingResult boundary_winding(const PlanarMap& map, const BoundaryCurve& curve) {
  if (curve.samples < 3) {
    throw std::invalid_argument("boundary_winding: need at least three samples");
  }
  const auto m = static_cast<std::size_t>(curve.samples);
  std::vector<Point2> base(m);
  parallel_for(m, [&](std::size_t k) { base[k] = map(curve(curve.theta(static_cast<int>(k)))); });

  Accumulator acc{map, curve};
  for (const auto& v : base) {
    acc.note(v);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double ta = curve.theta(static_cast<int>(k));
    const double tb = curve.theta(static_cast<int>(k) + 1);
    total += acc.segment(ta, base[k], tb, base[(k + 1) % m], 0);
  }
  const double turns = total / (2.0 * kPi);
  const int winding = static_cast<int>(std::lround(turns));
  if (std::abs(turns - winding) > 1e-6) {
    std::ostringstream msg;
    msg << "boundary_winding: accumulated angle " << total << " is not a multiple of 2 pi";
    throw RefinementExhausted(msg.str());
  }
  WindingResult out;
  out.winding = curve.orientation == Orientation::CCW ? winding : -winding;
  out.margin = acc.margin;
  out.samples_used = acc.evaluations;
  out.refinements = acc.refinements;
  return out;
}

DegreeResult region_degree(const PlanarMap& map, const PlanarRegion& region) {
  DegreeResult out;
  out.boundary_margin = std::numeric_limits<double>::infinity();
  for (const BoundaryCurve* c : region.curves()) {
    const WindingResult w = boundary_winding(map, *c);
    out.degree += w.winding;
    out.boundary_margin = std::min(out.boundary_margin, w.margin);
    out.samples_used += w.samples_used;
    out.refinements += w.refinements;
  }
  return out;
}

}  // namespace perdeg
