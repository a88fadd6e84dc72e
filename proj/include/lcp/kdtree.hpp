#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace lcp {

/// Static K-dimensional tree with axis-cycling median splits, stored
/// implicitly: the node for a range [lo, hi) is the entry at (lo + hi) / 2.
template <std::size_t K, typename Payload>
class KdTree {
 public:
  using Key = std::array<double, K>;

  struct Entry {
    Key key;
    Payload payload;
  };

  KdTree() = default;

  explicit KdTree(std::vector<Entry> entries) : entries_(std::move(entries)) {
    build(0, entries_.size(), 0);
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Calls f(entry) for every entry with lo[d] <= key[d] <= hi[d] on all axes.
  template <typename F>
  void for_each_in_box(const Key& lo, const Key& hi, F&& f) const {
    box_visit(0, entries_.size(), 0, lo, hi, f);
  }

  std::vector<Payload> query_box(const Key& lo, const Key& hi) const {
    std::vector<Payload> out;
    for_each_in_box(lo, hi, [&](const Entry& e) { out.push_back(e.payload); });
    return out;
  }

  /// Nearest entry to `q` with squared distance <= max_sq (ties: lowest
  /// position in the tree order, which is deterministic for a given input).
  std::optional<std::pair<const Entry*, double>> nearest(
      const Key& q, double max_sq = std::numeric_limits<double>::infinity()) const {
    Best best{nullptr, max_sq};
    nearest_visit(0, entries_.size(), 0, q, best);
    if (best.entry == nullptr) return std::nullopt;
    return std::make_pair(best.entry, best.sq);
  }

 private:
  struct Best {
    const Entry* entry;
    double sq;
  };

  void build(std::size_t lo, std::size_t hi, std::size_t depth) {
    if (hi - lo <= 1) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::size_t axis = depth % K;
    std::nth_element(entries_.begin() + lo, entries_.begin() + mid, entries_.begin() + hi,
                     [axis](const Entry& a, const Entry& b) { return a.key[axis] < b.key[axis]; });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
  }

  template <typename F>
  void box_visit(std::size_t lo, std::size_t hi, std::size_t depth, const Key& qlo, const Key& qhi,
                 F& f) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::size_t axis = depth % K;
    const Entry& e = entries_[mid];
    bool inside = true;
    for (std::size_t d = 0; d < K && inside; ++d) inside = qlo[d] <= e.key[d] && e.key[d] <= qhi[d];
    if (inside) f(e);
    if (qlo[axis] <= e.key[axis]) box_visit(lo, mid, depth + 1, qlo, qhi, f);
    if (qhi[axis] >= e.key[axis]) box_visit(mid + 1, hi, depth + 1, qlo, qhi, f);
  }

  void nearest_visit(std::size_t lo, std::size_t hi, std::size_t depth, const Key& q,
                     Best& best) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::size_t axis = depth % K;
    const Entry& e = entries_[mid];
    double sq = 0.0;
    for (std::size_t d = 0; d < K; ++d) sq += (e.key[d] - q[d]) * (e.key[d] - q[d]);
    if (sq < best.sq || (sq == best.sq && best.entry != nullptr && &e < best.entry) ||
        (sq <= best.sq && best.entry == nullptr)) {
      best = {&e, sq};
    }
    const double diff = q[axis] - e.key[axis];
    const bool left_first = diff <= 0.0;
    if (left_first) {
      nearest_visit(lo, mid, depth + 1, q, best);
      if (diff * diff <= best.sq) nearest_visit(mid + 1, hi, depth + 1, q, best);
    } else {
      nearest_visit(mid + 1, hi, depth + 1, q, best);
      if (diff * diff <= best.sq) nearest_visit(lo, mid, depth + 1, q, best);
    }
  }

  std::vector<Entry> entries_;
};

}  // namespace lcp
