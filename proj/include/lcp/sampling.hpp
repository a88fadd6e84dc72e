#pragma once

// Pair and triplet sources for the recognition loops: pigeonhole block
// partitions and edges of random regular (multi)graphs with spectral checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcp/error.hpp"
#include "lcp/geom3.hpp"
#include "lcp/index.hpp"

namespace lcp::sampling {

using index::IndexPair;
using index::IndexTriple;

// ---------------------------------------------------------------------------
// Pigeonhole partitions.

struct Partition {
  std::vector<std::vector<Index>> blocks;
};

/// Consecutive blocks of `block` indices; a ragged remainder joins the last
/// block so the number of blocks is floor(n / block) (one block when n < block).
inline Partition block_partition(std::size_t n, std::size_t block) {
  if (block == 0) throw Error(ErrorCode::InvalidArgument, "block size must be positive");
  Partition part;
  if (n == 0) return part;
  const std::size_t count = std::max<std::size_t>(1, n / block);
  part.blocks.resize(count);
  for (std::size_t i = 0; i < n; ++i)
    part.blocks[std::min(i / block, count - 1)].push_back(static_cast<Index>(i));
  return part;
}

namespace detail {

inline void check_alpha(std::size_t n, double alpha) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 1");
}

}  // namespace detail

inline Partition pair_partition(std::size_t n, double alpha) {
  detail::check_alpha(n, alpha);
  return block_partition(n, static_cast<std::size_t>(std::ceil(alpha)));
}

inline Partition triplet_partition(std::size_t n, double alpha) {
  detail::check_alpha(n, alpha);
  return block_partition(n, static_cast<std::size_t>(std::ceil(2.0 * alpha)));
}

/// All within-block pairs (i < j). Any index set larger than n / alpha holds
/// two indices of one block.
inline std::vector<IndexPair> pigeonhole_pairs(std::size_t n, double alpha) {
  std::vector<IndexPair> out;
  for (const auto& b : pair_partition(n, alpha).blocks)
    for (std::size_t x = 0; x < b.size(); ++x)
      for (std::size_t y = x + 1; y < b.size(); ++y) out.emplace_back(b[x], b[y]);
  return out;
}

/// All within-block triplets (i < j < k) of blocks of size ceil(2 alpha).
inline std::vector<IndexTriple> pigeonhole_triplets(std::size_t n, double alpha) {
  std::vector<IndexTriple> out;
  for (const auto& b : triplet_partition(n, alpha).blocks)
    for (std::size_t x = 0; x < b.size(); ++x)
      for (std::size_t y = x + 1; y < b.size(); ++y)
        for (std::size_t z = y + 1; z < b.size(); ++z) out.push_back({b[x], b[y], b[z]});
  return out;
}

inline std::vector<IndexPair> all_pairs(std::size_t n) {
  std::vector<IndexPair> out;
  out.reserve(n * (n > 0 ? n - 1 : 0) / 2);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) out.emplace_back(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// Regular graphs.

struct WeightedEdge {
  Index u = 0;
  Index v = 0;
  std::size_t mult = 1;
};

/// d-regular graph on {0..n-1} as a list of distinct edges u < v with
/// multiplicities (all 1 for simple graphs). No self-loops.
struct ExpanderGraph {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<WeightedEdge> edges;
  double lambda_est = 0.0;
  bool multigraph = false;
  std::uint64_t seed = 0;  // seed of the accepted attempt

  std::vector<IndexPair> distinct_pairs() const {
    std::vector<IndexPair> out;
    out.reserve(edges.size());
    for (const auto& e : edges) out.emplace_back(e.u, e.v);
    return out;
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> deg(n, 0);
    for (const auto& e : edges) {
      deg[e.u] += e.mult;
      deg[e.v] += e.mult;
    }
    return deg;
  }
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline bool is_connected(const ExpanderGraph& g) {
  if (g.n == 0) return true;
  std::vector<std::vector<Index>> adj(g.n);
  for (const auto& e : g.edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<char> seen(g.n, 0);
  std::queue<Index> bfs;
  bfs.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!bfs.empty()) {
    const Index u = bfs.front();
    bfs.pop();
    for (Index v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        bfs.push(v);
      }
  }
  return reached == g.n;
}

/// Largest |eigenvalue| of the adjacency matrix over the complement of the
/// all-ones vector, by power iteration on A^2 with the top eigenvector
/// projected out. Disconnected graphs return d.
inline double estimate_lambda(const ExpanderGraph& g) {
  const std::size_t n = g.n;
  if (n <= 1) return 0.0;
  if (!is_connected(g)) return static_cast<double>(g.d);

  std::vector<std::size_t> offset(n + 1, 0);
  for (const auto& e : g.edges) {
    ++offset[e.u + 1];
    ++offset[e.v + 1];
  }
  std::partial_sum(offset.begin(), offset.end(), offset.begin());
  std::vector<std::pair<Index, double>> nbr(offset[n]);
  {
    auto fill = offset;
    for (const auto& e : g.edges) {
      nbr[fill[e.u]++] = {e.v, static_cast<double>(e.mult)};
      nbr[fill[e.v]++] = {e.u, static_cast<double>(e.mult)};
    }
  }
  auto multiply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t t = offset[i]; t < offset[i + 1]; ++t) s += nbr[t].second * x[nbr[t].first];
      y[i] = s;
    }
  };
  auto deflate_normalize = [&](std::vector<double>& x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double norm = 0.0;
    for (auto& v : x) {
      v -= mean;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) return false;
    for (auto& v : x) v /= norm;
    return true;
  };

  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> x(n), y(n);
  for (auto& v : x) v = unit(rng);
  if (!deflate_normalize(x)) return 0.0;

  const std::size_t cap = std::max<std::size_t>(
      1000, 10 * n * static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(n)))));
  double estimate = 0.0;
  std::size_t stable = 0;
  for (std::size_t it = 0; it < cap; ++it) {
    multiply(x, y);
    double sq = 0.0;
    for (double v : y) sq += v * v;
    const double next = std::sqrt(sq);
    if (std::abs(next - estimate) <= 1e-12 * std::max(1.0, next)) {
      if (++stable >= 3) {
        estimate = next;
        break;
      }
    } else {
      stable = 0;
    }
    estimate = next;
    // one more multiplication so the iterate follows A^2 and the sign
    // alternation of negative eigenvalues cancels
    multiply(y, x);
    if (!deflate_normalize(x)) return estimate;
  }
  return estimate;
}

namespace detail {

inline ExpanderGraph from_adjacency_lists(std::size_t n, std::size_t d,
                                          const std::vector<IndexPair>& raw, bool multigraph) {
  std::vector<IndexPair> sorted = raw;
  for (auto& [a, b] : sorted)
    if (a > b) std::swap(a, b);
  std::sort(sorted.begin(), sorted.end());
  ExpanderGraph g;
  g.n = n;
  g.d = d;
  g.multigraph = multigraph;
  for (const auto& [a, b] : sorted) {
    if (!g.edges.empty() && g.edges.back().u == a && g.edges.back().v == b)
      ++g.edges.back().mult;
    else
      g.edges.push_back({a, b, 1});
  }
  return g;
}

// Pairing model with rejection: repeatedly join two random free stubs whose
// vertices differ and are not yet adjacent; restart when stuck.
inline std::optional<ExpanderGraph> try_simple_regular(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  for (int restart = 0; restart < 200; ++restart) {
    std::vector<Index> stubs;
    stubs.reserve(n * d);
    for (Index v = 0; v < n; ++v)
      for (std::size_t t = 0; t < d; ++t) stubs.push_back(v);
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    std::vector<IndexPair> edges;
    bool stuck = false;
    while (!stubs.empty() && !stuck) {
      bool placed = false;
      for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
        std::uniform_int_distribution<std::size_t> pick(0, stubs.size() - 1);
        const std::size_t a = pick(rng), b = pick(rng);
        const Index u = stubs[a], v = stubs[b];
        if (a == b || u == v || adj[u][v]) continue;
        adj[u][v] = adj[v][u] = 1;
        edges.emplace_back(u, v);
        const std::size_t hi = std::max(a, b), lo = std::min(a, b);
        stubs[hi] = stubs.back();
        stubs.pop_back();
        stubs[lo] = stubs.back();
        stubs.pop_back();
        placed = true;
      }
      if (placed) continue;
      // check whether any admissible pair remains
      std::vector<Index> verts = stubs;
      std::sort(verts.begin(), verts.end());
      verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
      bool any = false;
      for (std::size_t x = 0; x < verts.size() && !any; ++x)
        for (std::size_t y = x + 1; y < verts.size() && !any; ++y) any = !adj[verts[x]][verts[y]];
      stuck = !any;
    }
    if (!stuck) return from_adjacency_lists(n, d, edges, false);
  }
  return std::nullopt;
}

// Union of floor(d / 2) random Hamiltonian cycles plus, for odd d, a random
// perfect matching. Parallel edges are kept; loops cannot occur.
inline ExpanderGraph random_cycle_union(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<std::size_t> count(n * n, 0);
  auto add = [&](Index a, Index b) {
    if (a > b) std::swap(a, b);
    ++count[a * n + b];
  };
  for (std::size_t c = 0; c < d / 2; ++c) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n; ++i) add(order[i], order[(i + 1) % n]);
  }
  if (d % 2 == 1) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i + 1 < n; i += 2) add(order[i], order[i + 1]);
  }
  ExpanderGraph g;
  g.n = n;
  g.d = d;
  g.multigraph = true;
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b)
      if (count[a * n + b] > 0) g.edges.push_back({a, b, count[a * n + b]});
  return g;
}

}  // namespace detail

inline constexpr int kExpanderRetries = 32;

/// Simple d-regular graph from the pairing model, regenerated with derived
/// seeds until it is connected with lambda_est <= 2 sqrt(d).
inline ExpanderGraph random_regular_graph(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (d == 0 || d >= n) throw Error(ErrorCode::InvalidArgument, "simple regular graph needs 0 < d < n");
  if ((n * d) % 2 != 0) throw Error(ErrorCode::InvalidArgument, "n * d must be even");
  for (int attempt = 0; attempt < kExpanderRetries; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : derive_seed(seed, attempt);
    std::mt19937_64 rng(s);
    auto g = detail::try_simple_regular(n, d, rng);
    if (!g) continue;
    g->seed = s;
    g->lambda_est = estimate_lambda(*g);
    if (is_connected(*g) && g->lambda_est <= 2.0 * std::sqrt(static_cast<double>(d))) return *g;
  }
  throw Error(ErrorCode::ConstructionFailed,
              "no expander with n=" + std::to_string(n) + " d=" + std::to_string(d) + " within retry cap");
}

/// d-regular multigraph (parallel edges, no loops) for any d >= 2; retried
/// until connected.
inline ExpanderGraph random_regular_multigraph(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 3 || d < 2) throw Error(ErrorCode::InvalidArgument, "regular multigraph needs n >= 3 and d >= 2");
  if (d % 2 == 1 && n % 2 == 1) throw Error(ErrorCode::InvalidArgument, "n * d must be even");
  for (int attempt = 0; attempt < kExpanderRetries; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : derive_seed(seed, attempt);
    std::mt19937_64 rng(s);
    auto g = detail::random_cycle_union(n, d, rng);
    g.seed = s;
    g.lambda_est = estimate_lambda(g);
    // Once d > 4(n-1)^2 the -d/(n-1) eigenvalue of the mean graph alone exceeds
    // 2 sqrt(d), so only connectivity is required here; lambda_est is recorded.
    if (is_connected(g)) return g;
  }
  throw Error(ErrorCode::ConstructionFailed,
              "no connected regular multigraph with n=" + std::to_string(n) + " d=" + std::to_string(d));
}

/// Simple graph when d < n, multigraph otherwise.
inline ExpanderGraph make_expander(std::size_t n, std::size_t d, std::uint64_t seed) {
  return d < n ? random_regular_graph(n, d, seed) : random_regular_multigraph(n, d, seed);
}

/// |e(U, W)| counted with multiplicity.
inline std::size_t edges_between(const ExpanderGraph& g, std::span<const Index> U, std::span<const Index> W) {
  std::vector<char> side(g.n, 0);
  for (Index u : U) {
    if (u >= g.n) throw Error(ErrorCode::InvalidArgument, "vertex out of range");
    side[u] = 1;
  }
  for (Index w : W) {
    if (w >= g.n) throw Error(ErrorCode::InvalidArgument, "vertex out of range");
    if (side[w] == 1) throw Error(ErrorCode::OverlappingSets, "U and W must be disjoint");
    side[w] = 2;
  }
  std::size_t count = 0;
  for (const auto& e : g.edges)
    if ((side[e.u] == 1 && side[e.v] == 2) || (side[e.u] == 2 && side[e.v] == 1)) count += e.mult;
  return count;
}

// ---------------------------------------------------------------------------
// Pair sources.

struct PairSource {
  enum class Kind { AllPairs, Pigeonhole, Expander };
  Kind kind = Kind::AllPairs;
  double alpha = 1.0;
  std::size_t degree = 0;
  std::uint64_t seed = 0;

  static PairSource all() { return {}; }
  static PairSource pigeonhole(double alpha) { return {Kind::Pigeonhole, alpha, 0, 0}; }
  static PairSource expander(std::size_t degree, std::uint64_t seed) { return {Kind::Expander, 1.0, degree, seed}; }
};

/// Distinct pairs i < j over {0..n-1}, sorted.
inline std::vector<IndexPair> materialize(const PairSource& src, std::size_t n) {
  std::vector<IndexPair> out;
  switch (src.kind) {
    case PairSource::Kind::AllPairs:
      out = all_pairs(n);
      break;
    case PairSource::Kind::Pigeonhole:
      out = pigeonhole_pairs(n, src.alpha);
      break;
    case PairSource::Kind::Expander:
      out = make_expander(n, src.degree, src.seed).distinct_pairs();
      break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// diam_k.

inline double diameter(std::span<const Point3> S) {
  double best = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i)
    for (std::size_t j = i + 1; j < S.size(); ++j) best = std::max(best, (S[i] - S[j]).squaredNorm());
  return std::sqrt(best);
}

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

inline constexpr double kDiamKLimit = 1e6;

/// min over |T| = k of diameter(S \ T), by enumerating all removals.
inline double diam_k(std::span<const Point3> S, std::size_t k) {
  const std::size_t n = S.size();
  if (k >= n || n - k < 2) throw Error(ErrorCode::InvalidArgument, "diam_k needs |S| - k >= 2");
  if (binomial(n, k) > kDiamKLimit) throw Error(ErrorCode::TooLarge, "too many removals to enumerate");

  struct Pair {
    double len;
    Index i, j;
  };
  std::vector<Pair> pairs;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) pairs.push_back({(S[i] - S[j]).norm(), i, j});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.len > b.len; });

  std::vector<char> removed(n, 0);
  std::fill(removed.begin(), removed.begin() + static_cast<std::ptrdiff_t>(k), 1);
  double best = std::numeric_limits<double>::infinity();
  do {
    for (const auto& p : pairs)
      if (!removed[p.i] && !removed[p.j]) {
        best = std::min(best, p.len);
        break;
      }
  } while (std::prev_permutation(removed.begin(), removed.end()));
  return best;
}

}  // namespace lcp::sampling
