#pragma once

// Distance-approximation matching for tolerant LCP. For each source pair
// (q1, q2) and each base (p1, p2) of similar length, the pair-canonical motion
// leaves one degree of freedom, the rotation about p1p2; every (q, p) voted for
// the base restricts that rotation to an interval, and the most stabbed angle
// fixes the motion.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <tuple>
#include <vector>

#include "lcp/detail/parallel.hpp"
#include "lcp/error.hpp"
#include "lcp/exact.hpp"
#include "lcp/geom3.hpp"
#include "lcp/index.hpp"
#include "lcp/oracle.hpp"
#include "lcp/result.hpp"
#include "lcp/sampling.hpp"
#include "lcp/verify.hpp"

namespace lcp::da {

using index::IndexPair;
using sampling::PairSource;

struct MatchParams {
  double eps = 0.0;
  PairSource pair_source;
  double report_factor = 4.0;    // certificate radius in units of eps
  double interval_factor = 4.0;  // dihedral interval radius in units of eps
  double min_tolerance = 1e-9;   // eps floor relative to the instance scale
  unsigned threads = 1;          // 0 = hardware concurrency
};

namespace detail {

struct Candidate {
  bool valid = false;
  std::size_t score = 0;  // V + 2
  double residual = std::numeric_limits<double>::infinity();
  std::array<Index, 4> base{};  // q1, q2, p1, p2
  double angle = 0.0;
  RigidMotion motion;
};

// More points, then smaller residual, then smaller base, then smaller angle.
inline bool better(const Candidate& a, const Candidate& b) {
  if (a.valid != b.valid) return a.valid;
  if (a.score != b.score) return a.score > b.score;
  if (a.residual != b.residual) return a.residual < b.residual;
  if (a.base != b.base) return a.base < b.base;
  return a.angle < b.angle;
}

inline Candidate best_of(const std::vector<Candidate>& cands) {
  Candidate best;
  for (const auto& c : cands)
    if (better(c, best)) best = c;
  return best;
}

struct Vote {
  Index q;
  Index p;
};

// Preprocessed P with the recognition step shared by both variants: for an
// oriented source pair (q1, q2), every base within `slack` in length together
// with the (q, p) it was voted with.
class Recognizer {
 public:
  Recognizer(std::span<const Point3> P, std::span<const Point3> Q, double slack)
      : P_(P), Q_(Q), slack_(slack), pairs_(P) {
    if (P.size() >= 3) triplets_ = index::TripletIndex(P);
  }

  template <typename F>
  void for_each_base(Index q1, Index q2, F&& f) const {
    const double len = (Q_[q1] - Q_[q2]).norm();
    const auto range = pairs_.query(len, slack_);
    if (range.empty()) return;
    index::VoteTable table;
    if (P_.size() >= 3) {
      for (Index q = 0; q < Q_.size(); ++q) {
        if (q == q1 || q == q2) continue;
        for (const auto& t : triplets_.query(triangle_key(Q_[q1], Q_[q2], Q_[q]), slack_))
          table.vote({t[0], t[1]}, {q, t[2]});
      }
    }
    std::vector<Vote> votes;
    for (const auto& e : range)
      for (const auto& [p1, p2] : {IndexPair{e.i, e.j}, IndexPair{e.j, e.i}}) {
        votes.clear();
        if (const auto* entry = table.find({p1, p2}))
          for (const auto& [q, p] : entry->matched) votes.push_back({q, p});
        f(p1, p2, std::span<const Vote>(votes));
      }
  }

 private:
  std::span<const Point3> P_;
  std::span<const Point3> Q_;
  double slack_;
  index::PairDict pairs_;
  index::TripletIndex triplets_;
};

inline std::vector<IndexPair> source_pairs(const PairSource& src, std::size_t n) {
  auto pairs = sampling::materialize(src, n);
  std::vector<IndexPair> oriented;
  oriented.reserve(2 * pairs.size());
  for (const auto& [a, b] : pairs) {
    oriented.emplace_back(a, b);
    oriented.emplace_back(b, a);
  }
  return oriented;
}

inline MatchResult finish(std::span<const Point3> P, std::span<const Point3> Q, const Candidate& best,
                          double radius, double eps) {
  if (!best.valid) throw Error(ErrorCode::NoCandidatePairs, "no source pair passes the length filter");
  auto result = oracle::certified_result(P, Q, best.motion, radius);
  result.votes = best.score;
  result.base_q = {best.base[0], best.base[1]};
  result.base_p = {best.base[2], best.base[3]};
  result.angle = best.angle;
  result.tolerant = oracle::tolerant(P, Q, eps);
  return result;
}

inline void check_sizes(std::span<const Point3> P, std::span<const Point3> Q) {
  if (P.size() < 2 || Q.size() < 2) throw Error(ErrorCode::TooFewPoints, "need at least 2 points in P and Q");
}

}  // namespace detail

/// Tolerant matching. Each candidate motion brings its V + 2 counted points of
/// Q within interval_factor * eps of P; the winner is certified by a fresh
/// verification at report_factor * eps.
inline MatchResult da_match(std::span<const Point3> P, std::span<const Point3> Q, const MatchParams& params) {
  detail::check_sizes(P, Q);
  if (!(params.eps >= 0.0) || !std::isfinite(params.eps)) throw Error(ErrorCode::InvalidArgument, "eps must be >= 0");
  if (!(params.report_factor > 0.0) || !(params.interval_factor > 0.0))
    throw Error(ErrorCode::InvalidArgument, "radius factors must be positive");
  const double eps = std::max(params.eps, params.min_tolerance * instance_scale(P, Q));
  const double radius = params.interval_factor * eps;
  const detail::Recognizer rec(P, Q, 2.0 * eps);
  const auto sources = detail::source_pairs(params.pair_source, Q.size());

  auto accs = lcp::detail::parallel_accumulate<detail::Candidate>(
      sources.size(), params.threads, [&](std::size_t t, detail::Candidate& local) {
        const auto [q1, q2] = sources[t];
        std::vector<AngleInterval> intervals;
        std::vector<std::size_t> groups;
        rec.for_each_base(q1, q2, [&](Index p1, Index p2, std::span<const detail::Vote> votes) {
          const RigidMotion phi = pair_canonical_motion(P[p1], P[p2], Q[q1], Q[q2]);
          intervals.clear();
          groups.clear();
          for (const auto& v : votes) {
            intervals.push_back(dihedral_interval(P[p1], P[p2], phi(Q[v.q]), P[v.p], radius));
            groups.push_back(v.q);
          }
          const auto overlap = max_overlap_angle_grouped(intervals, groups);
          const std::size_t score = overlap.count + 2;
          if (local.valid && score < local.score) return;
          const double psi = overlap.count == 0 ? 0.0 : 0.5 * (overlap.angle + overlap.region_end);
          const RigidMotion mu = compose(rotation_about_axis(P[p1], P[p2], psi), phi);

          // residual over the counted points: q1, q2 and each q at its best voted p
          double residual = std::max((mu(Q[q1]) - P[p1]).norm(), (mu(Q[q2]) - P[p2]).norm());
          std::vector<double> per_q;
          for (std::size_t i = 0; i < votes.size(); ++i) {
            if (!intervals[i].contains(psi)) continue;
            per_q.resize(std::max<std::size_t>(per_q.size(), votes[i].q + 1), std::numeric_limits<double>::infinity());
            per_q[votes[i].q] = std::min(per_q[votes[i].q], (mu(Q[votes[i].q]) - P[votes[i].p]).norm());
          }
          for (double r : per_q)
            if (std::isfinite(r)) residual = std::max(residual, r);

          detail::Candidate c{true, score, residual, {q1, q2, p1, p2}, psi, mu};
          if (detail::better(c, local)) local = c;
        });
      });
  return detail::finish(P, Q, detail::best_of(accs), params.report_factor * eps, params.eps);
}

struct ExactModeParams {
  double tau = 1e-9;         // relative congruence tolerance
  double angle_tol = 1e-6;   // angles within this window count as one
  unsigned threads = 1;
};

/// Exact variant: a matched (q, p) fixes a single dihedral angle and the
/// winning angle of a base is the most frequent one.
inline MatchResult da_exact(std::span<const Point3> P, std::span<const Point3> Q, const ExactModeParams& params,
                            const PairSource& source = PairSource::all()) {
  detail::check_sizes(P, Q);
  if (!(params.tau > 0.0) || !(params.angle_tol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "tau and angle tolerance must be positive");
  const double tol = params.tau * instance_scale(P, Q);
  const detail::Recognizer rec(P, Q, tol);
  const auto sources = detail::source_pairs(source, Q.size());

  auto accs = lcp::detail::parallel_accumulate<detail::Candidate>(
      sources.size(), params.threads, [&](std::size_t t, detail::Candidate& local) {
        const auto [q1, q2] = sources[t];
        std::vector<double> angles;
        std::vector<Index> angle_q;
        std::vector<Index> free_q;
        rec.for_each_base(q1, q2, [&](Index p1, Index p2, std::span<const detail::Vote> votes) {
          const RigidMotion phi = pair_canonical_motion(P[p1], P[p2], Q[q1], Q[q2]);
          angles.clear();
          angle_q.clear();
          free_q.clear();
          for (const auto& v : votes) {
            const auto best = best_dihedral_angle(P[p1], P[p2], phi(Q[v.q]), P[v.p]);
            if (best.residual > tol) continue;
            if (best.free) {
              free_q.push_back(v.q);
            } else {
              angles.push_back(best.angle);
              angle_q.push_back(v.q);
            }
          }
          std::sort(free_q.begin(), free_q.end());
          free_q.erase(std::unique(free_q.begin(), free_q.end()), free_q.end());
          const auto mode = modal_angle(angles, params.angle_tol);
          const std::size_t score = mode.count + free_q.size() + 2;
          if (local.valid && score < local.score) return;
          const double psi = mode.count == 0 ? 0.0 : mode.angle;
          const RigidMotion mu = compose(rotation_about_axis(P[p1], P[p2], psi), phi);

          double residual = std::max((mu(Q[q1]) - P[p1]).norm(), (mu(Q[q2]) - P[p2]).norm());
          for (const auto& v : votes) {
            const double r = (mu(Q[v.q]) - P[v.p]).norm();
            if (r <= tol) residual = std::max(residual, r);
          }
          detail::Candidate c{true, score, residual, {q1, q2, p1, p2}, psi, mu};
          if (detail::better(c, local)) local = c;
        });
      });
  return detail::finish(P, Q, detail::best_of(accs), tol, 0.0);
}

inline constexpr double kExpanderDegreeFactor = 2500.0;
inline constexpr double kExpanderRadiusFactor = 6.0;

/// da_match over the edges of a random d-regular (multi)graph on Q, with
/// intervals and certificate at 6 eps.
inline MatchResult expander_da(std::span<const Point3> P, std::span<const Point3> Q, double eps, std::size_t degree,
                               double alpha, std::uint64_t seed, unsigned threads = 1) {
  if (!(alpha >= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 1");
  if (static_cast<double>(degree) <= kExpanderDegreeFactor * alpha * alpha)
    throw Error(ErrorCode::DegreeTooSmall, "degree must exceed 2500 alpha^2 = " +
                                               std::to_string(kExpanderDegreeFactor * alpha * alpha));
  MatchParams params;
  params.eps = eps;
  params.pair_source = PairSource::expander(degree, seed);
  params.interval_factor = kExpanderRadiusFactor;
  params.report_factor = kExpanderRadiusFactor;
  params.threads = threads;
  return da_match(P, Q, params);
}

}  // namespace lcp::da
