#pragma once

// Independent motion verification by exhaustive scan. Kept free of any index
// structure so it can certify the output of every algorithm.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <tuple>
#include <vector>

#include "lcp/geom3.hpp"
#include "lcp/result.hpp"

namespace lcp::oracle {

struct Verification {
  std::vector<Correspondence> matched;    // every q within radius, with its nearest p
  std::vector<Correspondence> injective;  // greedy one-to-one by residual
  double max_residual = 0.0;              // over `matched`
};

/// The matched set I_mu at `radius`: q is matched when some p lies within
/// radius of mu(q). Ties between equidistant p resolve to the lower index.
inline Verification verify_motion(std::span<const Point3> P, std::span<const Point3> Q,
                                  const RigidMotion& mu, double radius) {
  Verification v;
  const double r2 = radius * radius;
  std::vector<Correspondence> all_close;
  for (Index qi = 0; qi < Q.size(); ++qi) {
    const Point3 x = mu(Q[qi]);
    double best = std::numeric_limits<double>::infinity();
    Index best_p = 0;
    for (Index pi = 0; pi < P.size(); ++pi) {
      const double d2 = (x - P[pi]).squaredNorm();
      if (d2 <= r2) all_close.push_back({qi, pi, std::sqrt(d2)});
      if (d2 < best) {
        best = d2;
        best_p = pi;
      }
    }
    if (best <= r2) {
      v.matched.push_back({qi, best_p, std::sqrt(best)});
      v.max_residual = std::max(v.max_residual, std::sqrt(best));
    }
  }
  std::sort(all_close.begin(), all_close.end(), [](const Correspondence& a, const Correspondence& b) {
    return std::tie(a.residual, a.q, a.p) < std::tie(b.residual, b.q, b.p);
  });
  std::vector<char> q_used(Q.size(), 0), p_used(P.size(), 0);
  for (const auto& c : all_close) {
    if (q_used[c.q] || p_used[c.p]) continue;
    q_used[c.q] = p_used[c.p] = 1;
    v.injective.push_back(c);
  }
  std::sort(v.injective.begin(), v.injective.end(),
            [](const Correspondence& a, const Correspondence& b) { return a.q < b.q; });
  return v;
}

/// Builds a MatchResult for `mu` from an independent verification pass.
inline MatchResult certified_result(std::span<const Point3> P, std::span<const Point3> Q,
                                    const RigidMotion& mu, double radius) {
  auto v = verify_motion(P, Q, mu, radius);
  MatchResult r;
  r.motion = mu;
  r.radius = radius;
  r.size = v.matched.size();
  r.dedup_size = v.injective.size();
  r.max_residual = v.max_residual;
  r.matched = std::move(v.matched);
  r.injective = std::move(v.injective);
  return r;
}

}  // namespace lcp::oracle
