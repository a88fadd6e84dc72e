#pragma once

// Preprocessing dictionaries over P: pair lengths (sorted), ordered triplet
// keys (kd-tree with box queries) and the per-pair vote table.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "lcp/error.hpp"
#include "lcp/geom3.hpp"
#include "lcp/kdtree.hpp"

namespace lcp::index {

using IndexPair = std::pair<Index, Index>;
using IndexTriple = std::array<Index, 3>;

struct PairEntry {
  double length;
  Index i;
  Index j;
};

/// All pairs i < j of a point set, sorted by length.
class PairDict {
 public:
  PairDict() = default;

  explicit PairDict(std::span<const Point3> P) {
    if (P.size() < 2) throw Error(ErrorCode::TooFewPoints, "pair dictionary needs at least 2 points");
    entries_.reserve(P.size() * (P.size() - 1) / 2);
    for (Index i = 0; i < P.size(); ++i)
      for (Index j = i + 1; j < P.size(); ++j) entries_.push_back({(P[i] - P[j]).norm(), i, j});
    std::sort(entries_.begin(), entries_.end(), [](const PairEntry& a, const PairEntry& b) {
      if (a.length != b.length) return a.length < b.length;
      return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });
  }

  std::size_t size() const { return entries_.size(); }
  const std::vector<PairEntry>& entries() const { return entries_; }

  /// Entries with length in [len - slack, len + slack].
  std::span<const PairEntry> query(double len, double slack) const {
    const double lo = len - slack;
    const double hi = len + slack;
    auto first = std::lower_bound(entries_.begin(), entries_.end(), lo,
                                  [](const PairEntry& e, double v) { return e.length < v; });
    auto last = std::upper_bound(first, entries_.end(), hi,
                                 [](double v, const PairEntry& e) { return v < e.length; });
    return {first, last};
  }

 private:
  std::vector<PairEntry> entries_;
};

inline PairDict build_pair_dict(std::span<const Point3> P) { return PairDict(P); }

inline std::vector<IndexPair> query_pair_range(const PairDict& d, double len, double slack) {
  std::vector<IndexPair> out;
  for (const auto& e : d.query(len, slack)) out.emplace_back(e.i, e.j);
  return out;
}

/// Every ordered triplet (i, j, k) of distinct indices keyed by triangle_key.
/// Collinear triplets are kept; callers that need a basis filter them.
class TripletIndex {
 public:
  using Tree = KdTree<3, IndexTriple>;

  TripletIndex() = default;

  explicit TripletIndex(std::span<const Point3> P) {
    if (P.size() < 3) throw Error(ErrorCode::TooFewPoints, "triplet index needs at least 3 points");
    const std::size_t m = P.size();
    std::vector<Tree::Entry> entries;
    entries.reserve(m * (m - 1) * (m - 2));
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) {
        if (j == i) continue;
        for (Index k = 0; k < m; ++k) {
          if (k == i || k == j) continue;
          entries.push_back({triangle_key(P[i], P[j], P[k]).as_array(), {i, j, k}});
        }
      }
    tree_ = Tree(std::move(entries));
  }

  std::size_t size() const { return tree_.size(); }
  const Tree& tree() const { return tree_; }

  /// Stored triplets whose key lies in key +/- slack per coordinate, sorted.
  std::vector<IndexTriple> query(const TriangleKey& key, double slack) const {
    const auto k = key.as_array();
    Tree::Key lo, hi;
    for (std::size_t d = 0; d < 3; ++d) {
      lo[d] = k[d] - slack;
      hi[d] = k[d] + slack;
    }
    auto out = tree_.query_box(lo, hi);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  Tree tree_;
};

inline TripletIndex build_triplet_index(std::span<const Point3> P) { return TripletIndex(P); }

inline std::vector<IndexTriple> query_triplet_box(const TripletIndex& t, const TriangleKey& key,
                                                  double slack) {
  return t.query(key, slack);
}

/// Candidate bases (p1, p2) with their matched (q, p) lists. The vote count of
/// a base always equals the length of its list.
class VoteTable {
 public:
  struct Entry {
    std::vector<IndexPair> matched;
    std::size_t votes() const { return matched.size(); }
  };

  /// Returns false (and changes nothing) when `matched` is already listed.
  bool vote(IndexPair base, IndexPair matched) {
    auto& entry = entries_[base];
    if (std::find(entry.matched.begin(), entry.matched.end(), matched) != entry.matched.end())
      return false;
    entry.matched.push_back(matched);
    return true;
  }

  std::size_t votes(IndexPair base) const {
    auto it = entries_.find(base);
    return it == entries_.end() ? 0 : it->second.votes();
  }

  const Entry* find(IndexPair base) const {
    auto it = entries_.find(base);
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::map<IndexPair, Entry>& entries() const { return entries_; }

 private:
  std::map<IndexPair, Entry> entries_;
};

/// Kd-tree over the points themselves, payload = point index.
class PointLocator {
 public:
  using Tree = KdTree<3, Index>;

  PointLocator() = default;

  explicit PointLocator(std::span<const Point3> P) {
    std::vector<Tree::Entry> entries;
    entries.reserve(P.size());
    for (Index i = 0; i < P.size(); ++i) entries.push_back({{P[i].x(), P[i].y(), P[i].z()}, i});
    tree_ = Tree(std::move(entries));
  }

  /// Index of the nearest point within `radius` together with its distance.
  std::optional<std::pair<Index, double>> nearest_within(const Point3& x, double radius) const {
    auto hit = tree_.nearest({x.x(), x.y(), x.z()}, radius * radius);
    if (!hit) return std::nullopt;
    return std::make_pair(hit->first->payload, std::sqrt(hit->second));
  }

  template <typename F>
  void for_each_in_cube(const Point3& x, double half_side, F&& f) const {
    tree_.for_each_in_box({x.x() - half_side, x.y() - half_side, x.z() - half_side},
                          {x.x() + half_side, x.y() + half_side, x.z() + half_side},
                          [&](const Tree::Entry& e) { f(e.payload); });
  }

 private:
  Tree tree_;
};

}  // namespace lcp::index
