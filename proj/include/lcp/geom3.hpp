#pragma once

// Geometry core: points, proper rigid motions, rigid-motion invariant keys,
// dihedral angle intervals and the angular sweep used to vote over them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lcp/error.hpp"

namespace lcp {

using Point3 = Eigen::Vector3d;
using PointSet = std::vector<Point3>;
using Index = std::uint32_t;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline bool is_finite(const Point3& p) { return p.allFinite(); }

/// Proper rigid motion x -> rotation * x + translation.
struct RigidMotion {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidMotion identity() { return {}; }

  Point3 operator()(const Point3& p) const { return rotation * p + translation; }

  RigidMotion inverse() const {
    RigidMotion inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }
};

inline Point3 apply(const RigidMotion& mu, const Point3& p) { return mu(p); }

/// apply(compose(outer, inner), p) == apply(outer, apply(inner, p)).
inline RigidMotion compose(const RigidMotion& outer, const RigidMotion& inner) {
  RigidMotion out;
  out.rotation = outer.rotation * inner.rotation;
  out.translation = outer.rotation * inner.translation + outer.translation;
  return out;
}

/// Largest absolute entry difference over the 12 parameters.
inline double max_norm_distance(const RigidMotion& a, const RigidMotion& b) {
  return std::max((a.rotation - b.rotation).cwiseAbs().maxCoeff(),
                  (a.translation - b.translation).cwiseAbs().maxCoeff());
}

inline bool is_proper_rotation(const Eigen::Matrix3d& r, double tol = 1e-9) {
  const Eigen::Matrix3d gram = r.transpose() * r - Eigen::Matrix3d::Identity();
  return gram.cwiseAbs().maxCoeff() <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

inline double normalize_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Rotation by `angle` about the directed axis from `origin` through `through`
/// (right-handed).
inline RigidMotion rotation_about_axis(const Point3& origin, const Point3& through, double angle) {
  const Eigen::Vector3d axis = (through - origin).normalized();
  RigidMotion mu;
  mu.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  mu.translation = origin - mu.rotation * origin;
  return mu;
}

// ---------------------------------------------------------------------------
// Degeneracy tests. Thresholds are relative to the local scale of the points.

inline double triangle_height(const Point3& a, const Point3& b, const Point3& c) {
  const double longest = std::max({(b - a).norm(), (c - a).norm(), (c - b).norm()});
  if (longest == 0.0) return 0.0;
  return (b - a).cross(c - a).norm() / longest;
}

inline bool is_collinear(const Point3& a, const Point3& b, const Point3& c, double rel = 1e-9) {
  const double diameter = std::max({(b - a).norm(), (c - a).norm(), (c - b).norm()});
  return triangle_height(a, b, c) <= rel * diameter;
}

// ---------------------------------------------------------------------------
// Rigid motions from correspondences.

using Triplet = std::array<Point3, 3>;

namespace detail {

// Orthonormal frame (columns) attached to an ordered non-collinear triplet.
inline Eigen::Matrix3d triplet_frame(const Triplet& t) {
  const Eigen::Vector3d e1 = (t[1] - t[0]).normalized();
  const Eigen::Vector3d n = (t[1] - t[0]).cross(t[2] - t[0]).normalized();
  Eigen::Matrix3d frame;
  frame.col(0) = e1;
  frame.col(1) = n.cross(e1);
  frame.col(2) = n;
  return frame;
}

// Minimal-angle rotation taking unit vector u onto unit vector v.
inline Eigen::Matrix3d minimal_rotation(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
  const double c = u.dot(v);
  if (1.0 + c < 1e-12) {
    // Antiparallel: half turn about the coordinate axis least parallel to v,
    // made orthogonal to v.
    Eigen::Index axis = 0;
    for (Eigen::Index i = 1; i < 3; ++i)
      if (std::abs(v[i]) < std::abs(v[axis])) axis = i;
    Eigen::Vector3d w = Eigen::Vector3d::Unit(axis);
    w = (w - w.dot(v) * v).normalized();
    return 2.0 * w * w.transpose() - Eigen::Matrix3d::Identity();
  }
  const Eigen::Vector3d k = u.cross(v);
  Eigen::Matrix3d kx;
  kx << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Eigen::Matrix3d::Identity() + kx + kx * kx / (1.0 + c);
}

}  // namespace detail

/// The unique proper rigid motion taking q_trip onto p_trip vertex by vertex
/// (anchoring the first vertex, the direction to the second and the plane of
/// the third). Side lengths are expected to agree within the caller's tolerance.
inline RigidMotion motion_from_bases(const Triplet& q_trip, const Triplet& p_trip,
                                     double collinear_rel = 1e-9) {
  if (is_collinear(q_trip[0], q_trip[1], q_trip[2], collinear_rel) ||
      is_collinear(p_trip[0], p_trip[1], p_trip[2], collinear_rel))
    throw Error(ErrorCode::DegenerateBasis, "collinear triplet cannot define a rigid motion");
  RigidMotion mu;
  mu.rotation = detail::triplet_frame(p_trip) * detail::triplet_frame(q_trip).transpose();
  mu.translation = p_trip[0] - mu.rotation * q_trip[0];
  return mu;
}

/// Canonical (p1,p2,q1,q2)-rigid motion: translate q1 onto p1, then apply the
/// minimal rotation about p1 taking direction q1q2 onto direction p1p2.
inline RigidMotion pair_canonical_motion(const Point3& p1, const Point3& p2, const Point3& q1,
                                         const Point3& q2) {
  const Eigen::Vector3d dp = p2 - p1;
  const Eigen::Vector3d dq = q2 - q1;
  if (dp.norm() < 1e-12 || dq.norm() < 1e-12)
    throw Error(ErrorCode::DegeneratePair, "coincident pair points");
  RigidMotion mu;
  mu.rotation = detail::minimal_rotation(dq.normalized(), dp.normalized());
  mu.translation = p1 - mu.rotation * q1;
  return mu;
}

// ---------------------------------------------------------------------------
// Dihedral angle intervals.

/// A subset of [0, 2pi): empty, the full circle, or a half-open arc
/// [start, end) running counterclockwise (it wraps through 0 when end < start).
struct AngleInterval {
  enum class Kind { Empty, Arc, Full };

  double start = 0.0;
  double end = 0.0;
  Kind kind = Kind::Empty;

  static AngleInterval empty() { return {}; }
  static AngleInterval full() { return {0.0, 0.0, Kind::Full}; }

  /// Arc starting at `start` of angular width `width`.
  static AngleInterval arc(double start, double width) {
    if (!(width > 1e-15)) return empty();
    if (width >= kTwoPi - 1e-15) return full();
    const double s = normalize_angle(start);
    const double e = normalize_angle(s + width);
    if (s == e) return width < std::numbers::pi ? empty() : full();
    return {s, e, Kind::Arc};
  }

  bool is_empty() const { return kind == Kind::Empty; }
  bool is_full() const { return kind == Kind::Full; }
  bool wraps() const { return kind == Kind::Arc && end < start; }

  double length() const {
    switch (kind) {
      case Kind::Empty: return 0.0;
      case Kind::Full: return kTwoPi;
      case Kind::Arc: return wraps() ? kTwoPi - start + end : end - start;
    }
    return 0.0;
  }

  bool contains(double theta) const {
    if (kind != Kind::Arc) return kind == Kind::Full;
    const double t = normalize_angle(theta);
    return wraps() ? (t >= start || t < end) : (t >= start && t < end);
  }
};

namespace detail {

// ||R_theta(q) - p||^2 = c0 + amp * cos(theta - phase) for rotation about the
// directed axis p1 -> p2.
struct DihedralForm {
  double c0 = 0.0;
  double amp = 0.0;
  double phase = 0.0;
};

inline DihedralForm dihedral_form(const Point3& p1, const Point3& p2, const Point3& q,
                                  const Point3& p) {
  const Eigen::Vector3d axis = (p2 - p1).normalized();
  const Eigen::Vector3d qv = q - p1;
  const Eigen::Vector3d d = p - p1;
  const Eigen::Vector3d q_par = qv.dot(axis) * axis;
  const Eigen::Vector3d q_perp = qv - q_par;
  const Eigen::Vector3d w = axis.cross(q_perp);
  const double c1 = -2.0 * q_perp.dot(d);
  const double c2 = -2.0 * w.dot(d);
  DihedralForm f;
  f.c0 = qv.squaredNorm() + d.squaredNorm() - 2.0 * q_par.dot(d);
  f.amp = std::hypot(c1, c2);
  f.phase = std::atan2(c2, c1);
  return f;
}

}  // namespace detail

/// Exactly the rotation angles about the directed axis p1 -> p2 that bring q to
/// within distance r of p.
inline AngleInterval dihedral_interval(const Point3& p1, const Point3& p2, const Point3& q,
                                       const Point3& p, double r) {
  const auto f = detail::dihedral_form(p1, p2, q, p);
  const double slack = r * r - f.c0;  // need amp * cos(theta - phase) <= slack
  if (f.amp == 0.0) return slack >= 0.0 ? AngleInterval::full() : AngleInterval::empty();
  if (slack >= f.amp) return AngleInterval::full();
  if (slack < -f.amp) return AngleInterval::empty();
  const double half = std::acos(std::clamp(slack / f.amp, -1.0, 1.0));
  return AngleInterval::arc(f.phase + half, kTwoPi - 2.0 * half);
}

/// Angle minimizing ||R_theta(q) - p|| about p1 -> p2 and the residual there.
/// `free` is set when the distance does not depend on the angle.
struct BestAngle {
  double angle = 0.0;
  double residual = 0.0;
  bool free = false;
};

inline BestAngle best_dihedral_angle(const Point3& p1, const Point3& p2, const Point3& q,
                                     const Point3& p, double free_rel = 1e-12) {
  const auto f = detail::dihedral_form(p1, p2, q, p);
  BestAngle best;
  const double scale = std::max(f.c0, 1e-300);
  if (f.amp <= free_rel * scale) {
    best.free = true;
    best.residual = std::sqrt(std::max(0.0, f.c0));
    return best;
  }
  best.angle = normalize_angle(f.phase + std::numbers::pi);
  best.residual = std::sqrt(std::max(0.0, f.c0 - f.amp));
  return best;
}

// ---------------------------------------------------------------------------
// Invariant keys.

/// Side lengths of an ordered triplet (a, b, c): |ab|, |ac|, |bc|.
struct TriangleKey {
  double l12 = 0.0;
  double l13 = 0.0;
  double l23 = 0.0;

  std::array<double, 3> as_array() const { return {l12, l13, l23}; }
};

inline TriangleKey triangle_key(const Point3& a, const Point3& b, const Point3& c) {
  return {(b - a).norm(), (c - a).norm(), (c - b).norm()};
}

/// Key of an ordered basis triplet plus a fourth point; `sign` is the
/// orientation of the fourth point relative to the basis plane.
struct QuadKey {
  TriangleKey base;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  int sign = 0;

  std::array<double, 7> as_array() const {
    return {base.l12, base.l13, base.l23, d1, d2, d3, static_cast<double>(sign)};
  }
};

inline QuadKey quad_key(const Point3& a, const Point3& b, const Point3& c, const Point3& p,
                        double zero_band_rel = 1e-9) {
  QuadKey key;
  key.base = triangle_key(a, b, c);
  key.d1 = (p - a).norm();
  key.d2 = (p - b).norm();
  key.d3 = (p - c).norm();
  const double scale = std::max({key.base.l12, key.base.l13, key.base.l23, key.d1, key.d2, key.d3});
  Eigen::Matrix3d m;
  m.col(0) = b - a;
  m.col(1) = c - a;
  m.col(2) = p - a;
  const double det = m.determinant();
  if (std::abs(det) >= zero_band_rel * scale * scale * scale) key.sign = det > 0 ? 1 : -1;
  return key;
}

// ---------------------------------------------------------------------------
// Distances between point sets.

/// Directed Hausdorff distance from Q to P: max over q of the distance to P.
inline double hausdorff(std::span<const Point3> P, std::span<const Point3> Q) {
  if (P.empty() || Q.empty()) throw Error(ErrorCode::EmptySet, "hausdorff needs non-empty sets");
  double worst = 0.0;
  for (const auto& q : Q) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : P) best = std::min(best, (p - q).squaredNorm());
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

inline double min_interpoint_distance(std::span<const Point3> S) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < S.size(); ++i)
    for (std::size_t j = i + 1; j < S.size(); ++j) best = std::min(best, (S[i] - S[j]).squaredNorm());
  return std::sqrt(best);
}

/// Bounding-box diagonal of both sets; the reference length for relative
/// tolerances. Never zero.
inline double instance_scale(std::span<const Point3> P, std::span<const Point3> Q) {
  double scale = 0.0;
  for (auto set : {P, Q}) {
    if (set.empty()) continue;
    Eigen::Vector3d lo = set[0], hi = set[0];
    for (const auto& p : set) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    scale = std::max(scale, (hi - lo).norm());
  }
  return scale > 0.0 ? scale : 1.0;
}

// ---------------------------------------------------------------------------
// Angular sweeps.

struct OverlapResult {
  double angle = 0.0;       // smallest angle reaching the maximum
  std::size_t count = 0;    // number of intervals (or groups) containing it
  double region_end = 0.0;  // the maximum holds on [angle, region_end)
};

namespace detail {

inline OverlapResult sweep_overlap(std::span<const AngleInterval> intervals,
                                   std::span<const std::size_t> groups) {
  struct Event {
    double angle;
    int delta;
    std::size_t group;
  };
  std::size_t group_count = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i)
    group_count = std::max(group_count, groups.empty() ? i + 1 : groups[i] + 1);

  std::vector<char> always(group_count, 0);
  for (std::size_t i = 0; i < intervals.size(); ++i)
    if (intervals[i].is_full()) always[groups.empty() ? i : groups[i]] = 1;

  std::vector<Event> events;
  events.reserve(3 * intervals.size());
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    const std::size_t g = groups.empty() ? i : groups[i];
    if (iv.kind != AngleInterval::Kind::Arc || always[g]) continue;
    events.push_back({iv.start, +1, g});
    if (iv.wraps()) {
      events.push_back({0.0, +1, g});
      events.push_back({iv.end, -1, g});
    } else {
      events.push_back({iv.end, -1, g});
    }
  }
  // Half-open arcs: at equal angles, closings happen before openings.
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.angle != b.angle ? a.angle < b.angle : a.delta < b.delta;
  });

  std::vector<std::size_t> active(group_count, 0);
  std::size_t current = static_cast<std::size_t>(std::count(always.begin(), always.end(), 1));
  OverlapResult best;
  bool have_best = false;
  double pos = 0.0;
  std::size_t i = 0;
  while (true) {
    for (; i < events.size() && events[i].angle == pos; ++i) {
      const auto& ev = events[i];
      if (ev.delta > 0) {
        if (active[ev.group]++ == 0) ++current;
      } else if (--active[ev.group] == 0) {
        --current;
      }
    }
    const double next = i < events.size() ? events[i].angle : kTwoPi;
    if (next > pos && (!have_best || current > best.count)) {
      best = {pos, current, next};
      have_best = true;
    }
    if (i >= events.size()) break;
    pos = next;
  }
  if (!have_best) best = {0.0, current, kTwoPi};
  return best;
}

}  // namespace detail

/// An angle lying in the largest number of intervals (smallest such angle).
inline OverlapResult max_overlap_angle(std::span<const AngleInterval> intervals) {
  return detail::sweep_overlap(intervals, {});
}

/// As max_overlap_angle, but counts distinct group ids: a group is active
/// when any of its intervals contains the angle.
inline OverlapResult max_overlap_angle_grouped(std::span<const AngleInterval> intervals,
                                               std::span<const std::size_t> groups) {
  if (groups.size() != intervals.size())
    throw Error(ErrorCode::InvalidArgument, "one group id per interval required");
  return detail::sweep_overlap(intervals, groups);
}

struct ModalAngle {
  double angle = 0.0;
  std::size_t count = 0;
};

/// Most frequent angle on the circle, counting angles within `tol` of the
/// window start. Ties resolve to the smallest angle.
inline ModalAngle modal_angle(std::vector<double> angles, double tol) {
  ModalAngle best;
  if (angles.empty()) return best;
  for (auto& a : angles) a = normalize_angle(a);
  std::sort(angles.begin(), angles.end());
  const std::size_t n = angles.size();
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (j < i) j = i;
    // advance j over the unrolled circle while within the window
    while (j + 1 < i + n) {
      const std::size_t nx = j + 1;
      const double a = nx < n ? angles[nx] : angles[nx - n] + kTwoPi;
      if (a - angles[i] > tol) break;
      j = nx;
    }
    const std::size_t count = j - i + 1;
    if (count > best.count) best = {angles[i], count};
  }
  return best;
}

}  // namespace lcp
