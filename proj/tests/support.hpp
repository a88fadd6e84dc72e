#pragma once

// Shared helpers for the test suite: seeded random geometry and small
// independent reference computations.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lcp/geom3.hpp"

namespace lcp::test {

inline Point3 random_point(std::mt19937_64& rng, double half = 10.0) {
  std::uniform_real_distribution<double> u(-half, half);
  return {u(rng), u(rng), u(rng)};
}

inline PointSet random_points(std::mt19937_64& rng, std::size_t n, double half = 10.0) {
  PointSet S;
  for (std::size_t i = 0; i < n; ++i) S.push_back(random_point(rng, half));
  return S;
}

// Rotation from a random unit quaternion, written out by hand rather than
// through Eigen's quaternion class.
inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  double w, x, y, z, n;
  do {
    w = g(rng);
    x = g(rng);
    y = g(rng);
    z = g(rng);
    n = std::sqrt(w * w + x * x + y * y + z * z);
  } while (n < 1e-6);
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
      2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
      2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  return r;
}

inline RigidMotion random_motion(std::mt19937_64& rng, double half = 10.0) {
  RigidMotion m;
  m.rotation = random_rotation(rng);
  m.translation = random_point(rng, half);
  return m;
}

// Rotation by `angle` about the unit axis `a` via the Rodrigues formula.
inline Eigen::Matrix3d rodrigues(const Eigen::Vector3d& a, double angle) {
  Eigen::Matrix3d k;
  k << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1 - std::cos(angle)) * k * k;
}

inline Point3 rotate_about(const Point3& p1, const Point3& p2, const Point3& q, double angle) {
  return p1 + rodrigues((p2 - p1).normalized(), angle) * (q - p1);
}

struct Fixture {
  PointSet P;
  PointSet Q;
  RigidMotion motion;                          // maps the common points of Q onto P
  std::vector<std::pair<Index, Index>> common;  // (q, p)
};

// Five common points C_Q -> C_P plus unrelated points in both sets. The first
// two common points of Q are q1 = Q[0], q2 = Q[1].
inline Fixture five_point_layout() {
  Fixture f;
  f.P = {Point3(0, 0, 0), Point3(4, 0, 0), Point3(1, 3, 0), Point3(2, 1, 5), Point3(-3, 2, 2),
         Point3(9, 9, 1), Point3(-7, 5, -6), Point3(6, -8, 3)};
  f.motion.rotation = rodrigues(Eigen::Vector3d(1, 2, 2).normalized(), 1.1);
  f.motion.translation = Point3(0.5, -1.5, 2.0);
  const RigidMotion inv = f.motion.inverse();
  for (Index i = 0; i < 5; ++i) {
    f.Q.push_back(inv(f.P[i]));
    f.common.emplace_back(i, i);
  }
  f.Q.push_back(Point3(20, 1, 1));
  f.Q.push_back(Point3(-4, 15, 7));
  return f;
}

}  // namespace lcp::test
