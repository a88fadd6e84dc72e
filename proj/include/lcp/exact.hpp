#pragma once

// Exact-LCP voting algorithms: pose clustering, alignment, the generalized
// Hough transform (triplet and pair based) and geometric hashing.
//
// "Exact" is realized in floating point: lengths are congruent when they agree
// within tau * scale (scale = instance bounding-box diagonal), and motions are
// voted on a grid of MotionKeys. Collinear triplets never serve as bases.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "lcp/detail/parallel.hpp"
#include "lcp/error.hpp"
#include "lcp/geom3.hpp"
#include "lcp/index.hpp"
#include "lcp/kdtree.hpp"
#include "lcp/result.hpp"
#include "lcp/verify.hpp"

namespace lcp::exact {

struct ExactParams {
  double tau = 1e-9;          // relative congruence tolerance
  double motion_grid = 1e-6;  // quantization step of MotionKey
  double collinear = 1e-9;    // relative collinearity threshold
  unsigned threads = 1;       // 0 = hardware concurrency
};

/// 9 rotation entries on a grid of `grid`, 3 translation entries on a grid of
/// grid * scale.
using MotionKey = std::array<std::int64_t, 12>;

namespace detail {

inline std::array<double, 12> motion_coords(const RigidMotion& mu, double grid, double scale) {
  std::array<double, 12> c{};
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) c[3 * r + k] = mu.rotation(r, k) / grid;
  for (int k = 0; k < 3; ++k) c[9 + k] = mu.translation[k] / (grid * scale);
  return c;
}

}  // namespace detail

inline MotionKey motion_key(const RigidMotion& mu, double grid, double scale) {
  const auto c = detail::motion_coords(mu, grid, scale);
  MotionKey key{};
  for (std::size_t i = 0; i < 12; ++i) key[i] = std::llround(c[i]);
  return key;
}

/// Indices of the basis that first produced a motion: Q-side then P-side.
using BaseTag = std::array<Index, 6>;

/// Dictionary of voted motions. A motion whose quantized coordinates sit near a
/// cell boundary also probes the neighbouring cells, so recomputations of one
/// motion that differ by rounding noise share a single cell.
class MotionVoteTable {
 public:
  struct Cell {
    RigidMotion motion;
    std::size_t votes = 0;
    BaseTag base{};
  };

  MotionVoteTable(double grid, double scale) : grid_(grid), scale_(scale) {}

  void vote(const RigidMotion& mu, const BaseTag& base) {
    auto [key, found] = locate(mu);
    if (found != cells_.end()) {
      auto& cell = cells_.find(found->first)->second;
      cell.votes += 1;
      cell.base = std::min(cell.base, base);
      return;
    }
    cells_.emplace(key, Cell{mu, 1, base});
  }

  std::size_t votes_for(const RigidMotion& mu) const {
    auto [key, found] = locate(mu);
    return found == cells_.end() ? 0 : found->second.votes;
  }

  bool empty() const { return cells_.empty(); }
  std::size_t size() const { return cells_.size(); }
  const std::map<MotionKey, Cell>& cells() const { return cells_; }

  /// Most votes, then smallest base, then smallest key.
  std::map<MotionKey, Cell>::const_iterator best() const {
    auto best = cells_.end();
    for (auto it = cells_.begin(); it != cells_.end(); ++it) {
      if (best == cells_.end() || it->second.votes > best->second.votes ||
          (it->second.votes == best->second.votes && it->second.base < best->second.base))
        best = it;
    }
    return best;
  }

 private:
  using Map = std::map<MotionKey, Cell>;

  std::pair<MotionKey, Map::const_iterator> locate(const RigidMotion& mu) const {
    const auto c = detail::motion_coords(mu, grid_, scale_);
    MotionKey key{};
    std::array<int, 12> neighbour{};
    std::array<std::size_t, 12> ambiguous{};
    std::size_t n_amb = 0;
    for (std::size_t i = 0; i < 12; ++i) {
      key[i] = std::llround(c[i]);
      const double frac = c[i] - static_cast<double>(key[i]);
      if (std::abs(frac) > 0.45) {
        neighbour[i] = frac > 0 ? 1 : -1;
        ambiguous[n_amb++] = i;
      }
    }
    auto found = cells_.find(key);
    for (std::size_t mask = 1; found == cells_.end() && mask < (std::size_t{1} << n_amb); ++mask) {
      MotionKey probe = key;
      for (std::size_t b = 0; b < n_amb; ++b)
        if (mask & (std::size_t{1} << b)) probe[ambiguous[b]] += neighbour[ambiguous[b]];
      found = cells_.find(probe);
    }
    return {key, found};
  }

  double grid_;
  double scale_;
  Map cells_;
};

namespace detail {

struct Candidate {
  bool valid = false;
  std::size_t votes = 0;
  BaseTag base{};
  MotionKey key{};
  RigidMotion motion;
};

// Total order: more votes, then smaller base, then smaller key.
inline bool better(const Candidate& a, const Candidate& b) {
  if (a.valid != b.valid) return a.valid;
  if (a.votes != b.votes) return a.votes > b.votes;
  if (a.base != b.base) return a.base < b.base;
  return a.key < b.key;
}

inline Candidate best_of(const std::vector<Candidate>& cands) {
  Candidate best;
  for (const auto& c : cands)
    if (better(c, best)) best = c;
  return best;
}

struct Setup {
  double scale;
  double tol;
};

inline Setup setup(std::span<const Point3> P, std::span<const Point3> Q, const ExactParams& params,
                   std::size_t min_points = 3) {
  if (P.size() < min_points || Q.size() < min_points)
    throw Error(ErrorCode::TooFewPoints, "need at least " + std::to_string(min_points) + " points in P and Q");
  if (!(params.tau > 0.0) || !(params.motion_grid > 0.0))
    throw Error(ErrorCode::InvalidArgument, "tau and motion grid must be positive");
  const double scale = instance_scale(P, Q);
  return {scale, params.tau * scale};
}

inline bool key_in_box(const TriangleKey& stored, const TriangleKey& query, double tol) {
  const auto s = stored.as_array();
  const auto q = query.as_array();
  for (std::size_t d = 0; d < 3; ++d)
    if (!(q[d] - tol <= s[d] && s[d] <= q[d] + tol)) return false;
  return true;
}

struct OrderedBasis {
  TriangleKey key;
  index::IndexTriple idx;
};

inline std::vector<OrderedBasis> ordered_bases(std::span<const Point3> S, double collinear) {
  std::vector<OrderedBasis> out;
  const Index n = static_cast<Index>(S.size());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) {
        if (i == j || i == k || j == k) continue;
        if (is_collinear(S[i], S[j], S[k], collinear)) continue;
        out.push_back({triangle_key(S[i], S[j], S[k]), {i, j, k}});
      }
  return out;
}

inline Triplet triplet(std::span<const Point3> S, const index::IndexTriple& t) {
  return {S[t[0]], S[t[1]], S[t[2]]};
}

inline MatchResult finish(std::span<const Point3> P, std::span<const Point3> Q, const Candidate& best,
                          double tol) {
  if (!best.valid) throw Error(ErrorCode::NoCongruentTriplets, "no congruent triplets between P and Q");
  auto result = oracle::certified_result(P, Q, best.motion, tol);
  result.votes = best.votes;
  result.base_q.assign(best.base.begin(), best.base.begin() + 3);
  result.base_p.assign(best.base.begin() + 3, best.base.end());
  return result;
}

inline Candidate from_table(const MotionVoteTable& table) {
  Candidate c;
  auto it = table.best();
  if (it == table.cells().end()) return c;
  c.valid = true;
  c.votes = it->second.votes;
  c.base = it->second.base;
  c.key = it->first;
  c.motion = it->second.motion;
  return c;
}

}  // namespace detail

/// Pose clustering: every congruent pair of ordered non-collinear triplets
/// votes for the motion it defines; the most voted motion wins.
inline MatchResult pose_clustering(std::span<const Point3> P, std::span<const Point3> Q,
                                   const ExactParams& params = {}) {
  const auto [scale, tol] = detail::setup(P, Q, params);
  const auto p_bases = detail::ordered_bases(P, params.collinear);
  const auto q_bases = detail::ordered_bases(Q, params.collinear);
  MotionVoteTable table(params.motion_grid, scale);
  for (const auto& qb : q_bases)
    for (const auto& pb : p_bases) {
      if (!detail::key_in_box(pb.key, qb.key, tol)) continue;
      const auto mu = motion_from_bases(detail::triplet(Q, qb.idx), detail::triplet(P, pb.idx),
                                        params.collinear);
      table.vote(mu, {qb.idx[0], qb.idx[1], qb.idx[2], pb.idx[0], pb.idx[1], pb.idx[2]});
    }
  return detail::finish(P, Q, detail::from_table(table), tol);
}

/// Generalized Hough transform: pose clustering with congruent triplets of P
/// found through the triplet key index.
inline MatchResult ght(std::span<const Point3> P, std::span<const Point3> Q,
                       const ExactParams& params = {}) {
  const auto [scale, tol] = detail::setup(P, Q, params);
  const index::TripletIndex dict(P);
  const auto q_bases = detail::ordered_bases(Q, params.collinear);
  MotionVoteTable table(params.motion_grid, scale);
  for (const auto& qb : q_bases) {
    for (const auto& pt : dict.query(qb.key, tol)) {
      if (is_collinear(P[pt[0]], P[pt[1]], P[pt[2]], params.collinear)) continue;
      const auto mu = motion_from_bases(detail::triplet(Q, qb.idx), detail::triplet(P, pt), params.collinear);
      table.vote(mu, {qb.idx[0], qb.idx[1], qb.idx[2], pt[0], pt[1], pt[2]});
    }
  }
  return detail::finish(P, Q, detail::from_table(table), tol);
}

/// Alignment: each congruent triplet pair defines a motion whose vote is the
/// number of remaining points of Q it brings onto remaining points of P.
inline MatchResult alignment(std::span<const Point3> P, std::span<const Point3> Q,
                             const ExactParams& params = {}) {
  const auto [scale, tol] = detail::setup(P, Q, params);
  const auto p_bases = detail::ordered_bases(P, params.collinear);
  const auto q_bases = detail::ordered_bases(Q, params.collinear);
  const index::PointLocator locator(P);
  const double tol2 = tol * tol;

  auto accs = lcp::detail::parallel_accumulate<detail::Candidate>(
      q_bases.size(), params.threads, [&](std::size_t t, detail::Candidate& local) {
        const auto& qb = q_bases[t];
        for (const auto& pb : p_bases) {
          if (!detail::key_in_box(pb.key, qb.key, tol)) continue;
          const auto mu = motion_from_bases(detail::triplet(Q, qb.idx), detail::triplet(P, pb.idx),
                                            params.collinear);
          std::size_t votes = 0;
          for (Index q = 0; q < Q.size(); ++q) {
            if (q == qb.idx[0] || q == qb.idx[1] || q == qb.idx[2]) continue;
            const Point3 x = mu(Q[q]);
            bool hit = false;
            locator.for_each_in_cube(x, tol, [&](Index p) {
              if (hit || p == pb.idx[0] || p == pb.idx[1] || p == pb.idx[2]) return;
              hit = (x - P[p]).squaredNorm() <= tol2;
            });
            votes += hit;
          }
          detail::Candidate c{true, votes,
                              {qb.idx[0], qb.idx[1], qb.idx[2], pb.idx[0], pb.idx[1], pb.idx[2]},
                              motion_key(mu, params.motion_grid, scale), mu};
          if (detail::better(c, local)) local = c;
        }
      });
  return detail::finish(P, Q, detail::best_of(accs), tol);
}

/// Geometric hashing: P is preprocessed into keys of (ordered basis, fourth
/// point); each ordered basis of Q votes for bases of P through the keys of its
/// remaining points.
inline MatchResult geometric_hashing(std::span<const Point3> P, std::span<const Point3> Q,
                                     const ExactParams& params = {}) {
  const auto [scale, tol] = detail::setup(P, Q, params, 4);
  using QuadTree = KdTree<7, std::array<Index, 4>>;
  std::vector<QuadTree::Entry> entries;
  const auto p_bases = detail::ordered_bases(P, params.collinear);
  for (const auto& pb : p_bases)
    for (Index l = 0; l < P.size(); ++l) {
      if (l == pb.idx[0] || l == pb.idx[1] || l == pb.idx[2]) continue;
      entries.push_back({quad_key(P[pb.idx[0]], P[pb.idx[1]], P[pb.idx[2]], P[l]).as_array(),
                         {pb.idx[0], pb.idx[1], pb.idx[2], l}});
    }
  const QuadTree quads(std::move(entries));
  const index::TripletIndex triplets(P);
  const auto q_bases = detail::ordered_bases(Q, params.collinear);

  auto accs = lcp::detail::parallel_accumulate<detail::Candidate>(
      q_bases.size(), params.threads, [&](std::size_t t, detail::Candidate& local) {
        const auto& qb = q_bases[t];
        std::map<index::IndexTriple, std::size_t> votes;
        for (const auto& pt : triplets.query(qb.key, tol))
          if (!is_collinear(P[pt[0]], P[pt[1]], P[pt[2]], params.collinear)) votes[pt] = 0;
        if (votes.empty()) return;
        for (Index q = 0; q < Q.size(); ++q) {
          if (q == qb.idx[0] || q == qb.idx[1] || q == qb.idx[2]) continue;
          const auto key = quad_key(Q[qb.idx[0]], Q[qb.idx[1]], Q[qb.idx[2]], Q[q]).as_array();
          QuadTree::Key lo, hi;
          for (std::size_t d = 0; d < 6; ++d) {
            lo[d] = key[d] - tol;
            hi[d] = key[d] + tol;
          }
          lo[6] = key[6] - 0.5;
          hi[6] = key[6] + 0.5;
          quads.for_each_in_box(lo, hi, [&](const QuadTree::Entry& e) {
            auto it = votes.find({e.payload[0], e.payload[1], e.payload[2]});
            if (it != votes.end()) ++it->second;
          });
        }
        auto best = votes.begin();
        for (auto it = votes.begin(); it != votes.end(); ++it)
          if (it->second > best->second) best = it;
        const auto& pt = best->first;
        const auto mu = motion_from_bases(detail::triplet(Q, qb.idx), detail::triplet(P, pt), params.collinear);
        detail::Candidate c{true, best->second, {qb.idx[0], qb.idx[1], qb.idx[2], pt[0], pt[1], pt[2]},
                            motion_key(mu, params.motion_grid, scale), mu};
        if (detail::better(c, local)) local = c;
      });
  return detail::finish(P, Q, detail::best_of(accs), tol);
}

/// Pair-based generalized Hough transform over the given pairs of Q: for each
/// pair (q1, q2), every congruent (q1, q2, q) ~ (p1, p2, p) votes for its motion
/// in a table local to the pair; the best motion over all pairs wins. The base
/// reported is (q1, q2, q, p1, p2, p) of the first vote.
inline MatchResult ght_pair_based(std::span<const Point3> P, std::span<const Point3> Q,
                                  std::span<const index::IndexPair> pairs,
                                  const ExactParams& params = {}) {
  const auto [scale, tol] = detail::setup(P, Q, params);
  const index::TripletIndex dict(P);

  auto accs = lcp::detail::parallel_accumulate<detail::Candidate>(
      pairs.size(), params.threads, [&](std::size_t t, detail::Candidate& local) {
        const auto [q1, q2] = pairs[t];
        if (q1 == q2 || q1 >= Q.size() || q2 >= Q.size())
          throw Error(ErrorCode::InvalidArgument, "pair index out of range");
        MotionVoteTable table(params.motion_grid, scale);
        for (Index q = 0; q < Q.size(); ++q) {
          if (q == q1 || q == q2) continue;
          if (is_collinear(Q[q1], Q[q2], Q[q], params.collinear)) continue;
          for (const auto& pt : dict.query(triangle_key(Q[q1], Q[q2], Q[q]), tol)) {
            if (is_collinear(P[pt[0]], P[pt[1]], P[pt[2]], params.collinear)) continue;
            const auto mu = motion_from_bases({Q[q1], Q[q2], Q[q]}, detail::triplet(P, pt), params.collinear);
            table.vote(mu, {q1, q2, q, pt[0], pt[1], pt[2]});
          }
        }
        const auto c = detail::from_table(table);
        if (detail::better(c, local)) local = c;
      });
  return detail::finish(P, Q, detail::best_of(accs), tol);
}

}  // namespace lcp::exact
