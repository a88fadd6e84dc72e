#pragma once

// Ground truth: brute-force exact LCP, bottleneck distance and the planted
// instance generator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcp/error.hpp"
#include "lcp/geom3.hpp"
#include "lcp/index.hpp"
#include "lcp/result.hpp"
#include "lcp/verify.hpp"

namespace lcp::oracle {

using index::IndexPair;

struct OracleResult {
  std::size_t lcp_size = 0;
  RigidMotion witness;
  std::vector<Correspondence> matched;
};

/// Which set supplies the unordered triplets; the other supplies ordered ones.
enum class Enumeration { ByQ, ByP };

inline constexpr std::size_t kBruteForceMaxPoints = 14;
inline constexpr double kBruteForceMaxCandidates = 1e9;

namespace detail {

inline std::size_t count_matched(std::span<const Point3> P, std::span<const Point3> Q, const RigidMotion& mu,
                                 double tol2) {
  std::size_t count = 0;
  for (const auto& q : Q) {
    const Point3 x = mu(q);
    for (const auto& p : P)
      if ((x - p).squaredNorm() <= tol2) {
        ++count;
        break;
      }
  }
  return count;
}

inline bool congruent(const TriangleKey& a, const TriangleKey& b, double tol) {
  return std::abs(a.l12 - b.l12) <= tol && std::abs(a.l13 - b.l13) <= tol && std::abs(a.l23 - b.l23) <= tol;
}

}  // namespace detail

/// Exact LCP(P, Q) at absolute tolerance tau * instance_scale by exhaustive
/// enumeration: every congruent (unordered, ordered) triplet pair defines a
/// motion that is verified, and pair-defined motions cover matched sets that
/// are collinear or smaller than 3. Any non-empty P, Q match at least 1 point.
inline OracleResult exact_lcp_bruteforce(std::span<const Point3> P, std::span<const Point3> Q, double tau = 1e-9,
                                         Enumeration mode = Enumeration::ByQ) {
  const std::size_t m = P.size(), n = Q.size();
  if (std::max(m, n) > kBruteForceMaxPoints)
    throw Error(ErrorCode::TooLarge, "brute-force LCP is limited to 14 points per set");
  const double cand = static_cast<double>(m) * m * m * n * n * n;
  if (cand > kBruteForceMaxCandidates) throw Error(ErrorCode::TooLarge, "candidate count above cap");

  OracleResult best;
  if (m == 0 || n == 0) return best;
  const double tol = tau * instance_scale(P, Q);
  const double tol2 = tol * tol;

  auto consider = [&](const RigidMotion& mu) {
    const std::size_t c = detail::count_matched(P, Q, mu, tol2);
    if (c > best.lcp_size) {
      best.lcp_size = c;
      best.witness = mu;
    }
  };

  RigidMotion shift;
  shift.translation = P[0] - Q[0];
  consider(shift);

  for (Index q1 = 0; q1 < n; ++q1)
    for (Index q2 = q1 + 1; q2 < n; ++q2) {
      const double lq = (Q[q1] - Q[q2]).norm();
      for (Index p1 = 0; p1 < m; ++p1)
        for (Index p2 = 0; p2 < m; ++p2) {
          if (p1 == p2 || std::abs((P[p1] - P[p2]).norm() - lq) > tol) continue;
          consider(pair_canonical_motion(P[p1], P[p2], Q[q1], Q[q2]));
        }
    }

  // Unordered triplets of the "outer" set against ordered triplets of the other.
  const auto outer = mode == Enumeration::ByQ ? Q : P;
  const auto inner = mode == Enumeration::ByQ ? P : Q;
  const Index no = static_cast<Index>(outer.size()), ni = static_cast<Index>(inner.size());
  for (Index a = 0; a < no; ++a)
    for (Index b = a + 1; b < no; ++b)
      for (Index c = b + 1; c < no; ++c) {
        if (is_collinear(outer[a], outer[b], outer[c])) continue;
        const auto ko = triangle_key(outer[a], outer[b], outer[c]);
        for (Index i = 0; i < ni; ++i)
          for (Index j = 0; j < ni; ++j)
            for (Index k = 0; k < ni; ++k) {
              if (i == j || i == k || j == k) continue;
              if (!detail::congruent(ko, triangle_key(inner[i], inner[j], inner[k]), tol)) continue;
              if (is_collinear(inner[i], inner[j], inner[k])) continue;
              const Triplet to{outer[a], outer[b], outer[c]};
              const Triplet ti{inner[i], inner[j], inner[k]};
              consider(mode == Enumeration::ByQ ? motion_from_bases(to, ti) : motion_from_bases(ti, to));
            }
      }

  best.matched = verify_motion(P, Q, best.witness, tol).matched;
  return best;
}

// ---------------------------------------------------------------------------
// Bottleneck distance.

namespace detail {

// Kuhn's augmenting paths: can every q be assigned a distinct p with
// dist2[q][p] <= r2?
inline bool perfect_within(const std::vector<std::vector<double>>& dist2, std::size_t m, double r2) {
  const std::size_t n = dist2.size();
  std::vector<int> owner(m, -1);
  std::vector<char> seen;
  auto augment = [&](auto&& self, std::size_t q) -> bool {
    for (std::size_t p = 0; p < m; ++p) {
      if (dist2[q][p] > r2 || seen[p]) continue;
      seen[p] = 1;
      if (owner[p] < 0 || self(self, static_cast<std::size_t>(owner[p]))) {
        owner[p] = static_cast<int>(q);
        return true;
      }
    }
    return false;
  };
  for (std::size_t q = 0; q < n; ++q) {
    seen.assign(m, 0);
    if (!augment(augment, q)) return false;
  }
  return true;
}

}  // namespace detail

/// min over injections f: Q -> P of max ||f(q) - q||.
inline double bottleneck_distance(std::span<const Point3> P, std::span<const Point3> Q) {
  if (Q.size() > P.size()) throw Error(ErrorCode::SizeMismatch, "bottleneck needs |Q| <= |P|");
  if (Q.empty()) return 0.0;
  std::vector<std::vector<double>> dist2(Q.size(), std::vector<double>(P.size()));
  std::vector<double> radii;
  radii.reserve(Q.size() * P.size());
  for (std::size_t q = 0; q < Q.size(); ++q)
    for (std::size_t p = 0; p < P.size(); ++p) {
      dist2[q][p] = (Q[q] - P[p]).squaredNorm();
      radii.push_back(dist2[q][p]);
    }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  std::size_t lo = 0, hi = radii.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (detail::perfect_within(dist2, P.size(), radii[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return std::sqrt(radii[lo]);
}

// ---------------------------------------------------------------------------
// Planted instances.

struct Truth {
  RigidMotion motion;              // maps planted q onto (near) its partner p
  std::vector<IndexPair> pairs;    // (q, p), sorted by q
  std::size_t k = 0;
  double noise = 0.0;
};

struct Instance {
  PointSet P;
  PointSet Q;
  double eps = 0.0;
  std::optional<Truth> truth;
};

struct InstanceSpec {
  std::size_t m = 20;
  std::size_t n = 15;
  std::size_t k = 8;
  double eps = 0.5;
  double noise = 0.5;
  double box = 0.0;             // cube side for P; 0 picks one from m and the separation
  double min_separation = 0.0;  // for P; 0 picks max(2.5 eps, 2 eps + 2 noise) * 1.05
  bool exact = false;           // integer grid P, zero noise, LCP checked when small
};

inline constexpr std::size_t kMaxRejections = 100000;

/// True when both sets keep every pair of points more than 2 eps apart.
inline bool tolerant(std::span<const Point3> P, std::span<const Point3> Q, double eps) {
  return min_interpoint_distance(P) > 2.0 * eps && min_interpoint_distance(Q) > 2.0 * eps;
}

namespace detail {

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond quat;
  do {
    quat = Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng));
  } while (quat.norm() < 1e-6);
  return quat.normalized().toRotationMatrix();
}

inline Point3 random_in_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Point3 x;
  do {
    x = Point3(u(rng), u(rng), u(rng));
  } while (x.squaredNorm() > 1.0);
  return radius * x;
}

inline bool far_from(const PointSet& S, const Point3& x, double sep) {
  for (const auto& s : S)
    if ((s - x).norm() <= sep) return false;
  return true;
}

}  // namespace detail

/// Seeded planted instance: P by rejection sampling, k points of P carried into
/// Q's frame by the inverse of a random proper motion and perturbed inside the
/// noise ball, the remaining points of Q placed away from P.
inline Instance generate_instance(const InstanceSpec& spec, std::uint64_t seed) {
  if (spec.m < 1 || spec.n < 1) throw Error(ErrorCode::InvalidArgument, "m and n must be positive");
  if (spec.k > std::min(spec.m, spec.n)) throw Error(ErrorCode::InvalidArgument, "k exceeds min(m, n)");
  if (!(spec.eps >= 0.0) || !(spec.noise >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eps and noise must be >= 0");
  if (!spec.exact && spec.noise > spec.eps) throw Error(ErrorCode::InvalidArgument, "noise must not exceed eps");

  const double noise = spec.exact ? 0.0 : spec.noise;
  double sep = spec.min_separation > 0.0 ? spec.min_separation
                                         : std::max(2.5 * spec.eps, 2.0 * spec.eps + 2.0 * noise) * 1.05;
  if (spec.exact) sep = std::max(sep, 1.0);
  if (sep <= 2.0 * spec.eps) throw Error(ErrorCode::InvalidArgument, "separation must exceed 2 eps");
  const double box = spec.box > 0.0 ? spec.box
                                    : std::max(1.0, sep * std::cbrt(static_cast<double>(spec.m)) * 2.5);
  const double q_sep = std::max(2.0 * spec.eps, 1e-6 * box);
  const double clearance = spec.exact ? 0.25 : 2.0 * spec.eps + noise;

  std::mt19937_64 rng(seed);
  std::size_t rejections = 0;
  auto reject = [&] {
    if (++rejections >= kMaxRejections)
      throw Error(ErrorCode::SpecInfeasible, "rejection sampling failed " + std::to_string(kMaxRejections) + " times");
  };

  while (true) {
    Instance inst;
    inst.eps = spec.eps;
    std::uniform_real_distribution<double> coord(0.0, box);
    std::uniform_int_distribution<int> grid(0, static_cast<int>(std::ceil(box)));
    while (inst.P.size() < spec.m) {
      const Point3 x = spec.exact ? Point3(grid(rng), grid(rng), grid(rng)) : Point3(coord(rng), coord(rng), coord(rng));
      if (detail::far_from(inst.P, x, sep))
        inst.P.push_back(x);
      else
        reject();
    }

    Truth truth;
    truth.k = spec.k;
    truth.noise = noise;
    truth.motion.rotation = detail::random_rotation(rng);
    truth.motion.translation = Point3(coord(rng), coord(rng), coord(rng)) - Point3::Constant(box / 2);
    const RigidMotion inv = truth.motion.inverse();

    std::vector<Index> chosen(spec.m);
    std::iota(chosen.begin(), chosen.end(), Index{0});
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(spec.k);

    PointSet Q;
    std::vector<std::optional<Index>> partner;
    for (Index p : chosen) {
      Point3 q = inv(inst.P[p]);
      if (noise > 0.0) q += detail::random_in_ball(rng, noise);
      Q.push_back(q);
      partner.push_back(p);
    }
    bool ok = true;
    for (std::size_t a = 0; a < Q.size() && ok; ++a)
      for (std::size_t b = a + 1; b < Q.size() && ok; ++b) ok = (Q[a] - Q[b]).norm() > q_sep;
    if (!ok) {
      reject();
      continue;
    }
    while (Q.size() < spec.n) {
      const Point3 x(coord(rng), coord(rng), coord(rng));
      const Point3 q = inv(x);
      if (detail::far_from(inst.P, x, clearance) && detail::far_from(Q, q, q_sep)) {
        Q.push_back(q);
        partner.push_back(std::nullopt);
      } else {
        reject();
      }
    }

    std::vector<Index> order(spec.n);
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    inst.Q.resize(spec.n);
    for (Index i = 0; i < spec.n; ++i) {
      inst.Q[i] = Q[order[i]];
      if (partner[order[i]]) truth.pairs.emplace_back(i, *partner[order[i]]);
    }
    std::sort(truth.pairs.begin(), truth.pairs.end());
    inst.truth = std::move(truth);

    if (spec.exact && spec.k >= 3 && std::max(spec.m, spec.n) <= kBruteForceMaxPoints &&
        exact_lcp_bruteforce(inst.P, inst.Q).lcp_size > spec.k) {
      reject();
      continue;
    }
    return inst;
  }
}

}  // namespace lcp::oracle
