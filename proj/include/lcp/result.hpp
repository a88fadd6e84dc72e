#pragma once

#include <cstddef>
#include <vector>

#include "lcp/geom3.hpp"

namespace lcp {

/// q in Q matched to p in P, with residual ||mu(q) - p||.
struct Correspondence {
  Index q = 0;
  Index p = 0;
  double residual = 0.0;

  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

/// Output of every matching algorithm. `matched` is the verified matched set
/// I_mu at `radius` (each q paired with its nearest point of P, so several q
/// may share a p); `injective` is the greedy one-to-one subset of it.
struct MatchResult {
  RigidMotion motion;
  std::vector<Correspondence> matched;
  std::vector<Correspondence> injective;
  std::size_t size = 0;        // matched.size()
  std::size_t dedup_size = 0;  // injective.size()
  double max_residual = 0.0;
  double radius = 0.0;

  std::size_t votes = 0;  // algorithm-specific winning score
  std::vector<Index> base_q;
  std::vector<Index> base_p;
  double angle = 0.0;           // dihedral angle (DA variants)
  bool tolerant = false;        // both sets separated by more than 2 eps
};

}  // namespace lcp
