#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "lcp/da.hpp"
#include "lcp/oracle.hpp"
#include "lcp/verify.hpp"
#include "support.hpp"

using namespace lcp;
using namespace lcp::da;

namespace {

oracle::Instance tolerant_instance(std::size_t m, std::size_t n, std::size_t k, std::uint64_t seed) {
  oracle::InstanceSpec spec;
  spec.m = m;
  spec.n = n;
  spec.k = k;
  spec.eps = 0.5;
  spec.noise = 0.5;
  return oracle::generate_instance(spec, seed);
}

oracle::Instance exact_instance(std::size_t m, std::size_t n, std::size_t k, std::uint64_t seed) {
  oracle::InstanceSpec spec;
  spec.m = m;
  spec.n = n;
  spec.k = k;
  spec.eps = 0.0;
  spec.noise = 0.0;
  spec.exact = true;
  return oracle::generate_instance(spec, seed);
}

MatchParams params_for(double eps, unsigned threads = 1) {
  MatchParams p;
  p.eps = eps;
  p.threads = threads;
  return p;
}

bool within_box(const TriangleKey& a, const TriangleKey& b, double s) {
  return std::abs(a.l12 - b.l12) <= s && std::abs(a.l13 - b.l13) <= s && std::abs(a.l23 - b.l23) <= s;
}

}  // namespace

TEST(DaMatch, FivePointLayout) {
  const auto f = lcp::test::five_point_layout();
  const auto r = da_match(f.P, f.Q, params_for(1e-6));
  EXPECT_EQ(r.size, 5u);
  EXPECT_EQ(r.votes, 5u);
  EXPECT_LE(r.max_residual, 1e-6);
  EXPECT_LE(max_norm_distance(r.motion, f.motion), 1e-6);
}

TEST(DaMatch, PlantedTolerantInstances) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = tolerant_instance(20, 15, 8, seed);
    const auto r = da_match(inst.P, inst.Q, params_for(inst.eps));
    EXPECT_GE(r.size, inst.truth->k) << "seed " << seed;
    EXPECT_LE(r.max_residual, 4.0 * inst.eps + 1e-12) << "seed " << seed;
    EXPECT_TRUE(r.tolerant);
  }
}

TEST(DaMatch, ZeroEpsMatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t m = 6 + seed % 5, n = 5 + seed % 6;
    const auto inst = exact_instance(m, n, 3 + seed % (std::min(m, n) - 2), seed);
    const auto truth = oracle::exact_lcp_bruteforce(inst.P, inst.Q).lcp_size;
    EXPECT_EQ(da_match(inst.P, inst.Q, params_for(0.0)).size, truth) << "seed " << seed;
    EXPECT_EQ(da_exact(inst.P, inst.Q, {}).size, truth) << "seed " << seed;
  }
}

TEST(DaExact, FivePointLayoutAndIdentity) {
  const auto f = lcp::test::five_point_layout();
  const auto r = da_exact(f.P, f.Q, {});
  EXPECT_EQ(r.votes, 5u);
  EXPECT_EQ(r.size, 5u);
  std::mt19937_64 rng(31);
  const auto P = lcp::test::random_points(rng, 12);
  const auto id = da_exact(P, P, {});
  EXPECT_EQ(id.size, P.size());
  EXPECT_EQ(id.votes, P.size());
}

TEST(DaMatch, PigeonholeKeepsPlantedSize) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = tolerant_instance(24, 20, 6, seed);
    auto p = params_for(inst.eps);
    p.pair_source = PairSource::pigeonhole(20.0 / 6.0);
    const auto pig = da_match(inst.P, inst.Q, p);
    const auto all = da_match(inst.P, inst.Q, params_for(inst.eps));
    EXPECT_GE(pig.size, inst.truth->k) << "seed " << seed;
    EXPECT_GE(all.votes, pig.votes) << "seed " << seed;
  }
}

TEST(DaMatch, ScoreMonotoneUnderAddedPoints) {
  std::mt19937_64 rng(32);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto inst = tolerant_instance(15, 12, 6, seed);
    const auto before = da_match(inst.P, inst.Q, params_for(inst.eps));
    for (int extra = 0; extra < 3; ++extra) inst.P.push_back(lcp::test::random_point(rng, 20.0));
    const auto after = da_match(inst.P, inst.Q, params_for(inst.eps));
    EXPECT_GE(after.votes, before.votes) << "seed " << seed;
  }
}

// Dense sweep of the free rotation for every base; the number of distinct q
// within the interval radius at any sampled angle never beats the reported score.
TEST(DaMatch, DenseAngleSweepNeverBeatsScore) {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> jitter(0.0, 0.02);
  auto f = lcp::test::five_point_layout();
  for (auto& q : f.Q) q += Point3(jitter(rng), jitter(rng), jitter(rng));
  const double eps = 0.05;
  const auto r = da_match(f.P, f.Q, params_for(eps));
  const double radius = 4.0 * eps;
  const std::size_t steps = 100000;
  std::size_t best = 0;
  for (Index q1 = 0; q1 < 2; ++q1) {
    const Index q2 = 1 - q1;
    for (Index p1 = 0; p1 < f.P.size(); ++p1)
      for (Index p2 = 0; p2 < f.P.size(); ++p2) {
        if (p1 == p2 || std::abs((f.P[p1] - f.P[p2]).norm() - (f.Q[q1] - f.Q[q2]).norm()) > 2.0 * eps) continue;
        std::vector<std::pair<Index, Index>> votes;
        for (Index q = 0; q < f.Q.size(); ++q)
          for (Index p = 0; p < f.P.size(); ++p) {
            if (q == q1 || q == q2 || p == p1 || p == p2) continue;
            if (within_box(triangle_key(f.Q[q1], f.Q[q2], f.Q[q]), triangle_key(f.P[p1], f.P[p2], f.P[p]), 2.0 * eps))
              votes.emplace_back(q, p);
          }
        const RigidMotion phi = pair_canonical_motion(f.P[p1], f.P[p2], f.Q[q1], f.Q[q2]);
        for (std::size_t s = 0; s < steps; ++s) {
          const double psi = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(s) / steps;
          const RigidMotion mu = compose(rotation_about_axis(f.P[p1], f.P[p2], psi), phi);
          std::set<Index> hit;
          for (const auto& [q, p] : votes)
            if ((mu(f.Q[q]) - f.P[p]).norm() <= radius) hit.insert(q);
          best = std::max(best, hit.size());
        }
      }
  }
  EXPECT_LE(best + 2, r.votes);
  EXPECT_GE(r.votes, 5u);
}

TEST(ExpanderDa, DegreeThreshold) {
  const auto f = lcp::test::five_point_layout();
  try {
    expander_da(f.P, f.Q, 0.01, 2500, 1.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegreeTooSmall);
  }
  EXPECT_THROW(expander_da(f.P, f.Q, 0.01, 10000, 0.5, 1), Error);
}

TEST(ExpanderDa, NoiselessLayout) {
  const auto f = lcp::test::five_point_layout();
  const auto r = expander_da(f.P, f.Q, 1e-6, 2600, 1.0, 7);
  EXPECT_EQ(r.size, 5u);
  EXPECT_LE(r.radius, 6e-6 + 1e-15);
}

TEST(DaMatch, ThreadCountDoesNotChangeResult) {
  const auto inst = tolerant_instance(20, 15, 8, 5);
  const auto a = da_match(inst.P, inst.Q, params_for(inst.eps, 1));
  for (unsigned threads : {2u, 4u, 8u}) {
    const auto b = da_match(inst.P, inst.Q, params_for(inst.eps, threads));
    EXPECT_EQ(a.size, b.size);
    EXPECT_EQ(a.votes, b.votes);
    EXPECT_EQ(a.base_q, b.base_q);
    EXPECT_EQ(a.base_p, b.base_p);
    EXPECT_EQ(a.angle, b.angle);
    EXPECT_EQ(max_norm_distance(a.motion, b.motion), 0.0);
    const auto grid = exact_instance(12, 10, 6, 5);
    ExactModeParams e;
    e.threads = threads;
    EXPECT_EQ(da_exact(grid.P, grid.Q, e).votes, da_exact(grid.P, grid.Q, {}).votes);
  }
}

TEST(DaMatch, CertificateIsReproducible) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = tolerant_instance(18, 14, 7, seed);
    const auto r = da_match(inst.P, inst.Q, params_for(inst.eps));
    const auto v = oracle::verify_motion(inst.P, inst.Q, r.motion, r.radius);
    EXPECT_EQ(v.matched, r.matched);
    for (const auto& c : r.matched) {
      EXPECT_LE((r.motion(inst.Q[c.q]) - inst.P[c.p]).norm(), r.radius);
    }
    EXPECT_LE(r.dedup_size, r.size);
  }
}

TEST(DaMatch, InvalidInputs) {
  const PointSet one{Point3(0, 0, 0)};
  const PointSet two{Point3(0, 0, 0), Point3(1, 0, 0)};
  try {
    da_match(one, two, params_for(0.1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewPoints);
  }
  try {
    da_match(two, two, params_for(-1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
  EXPECT_EQ(da_match(two, two, params_for(0.0)).size, 2u);
}
