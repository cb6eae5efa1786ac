#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "zqsync/enumeration.hpp"
#include "zqsync/graphs.hpp"
#include "zqsync/model.hpp"

namespace zqsync {

/// Per-vertex probability vectors over the label alphabet.
using MarginalTable = std::vector<std::vector<double>>;

/// q x q joint posterior, table[x][x'] = P(theta_u = x, theta_v = x' | obs).
using PairwiseTable = std::vector<std::vector<double>>;

MarginalTable exact_posterior_marginals(const Graph& g, const Kernel& kernel, const Instance& inst,
                                        std::int64_t cap = kDefaultEnumerationCap);

/// Posterior of theta_u given only the observations inside the radius-l ball.
std::vector<double> local_marginal(const Graph& g, int u, int l, const Kernel& kernel,
                                   const Instance& inst,
                                   std::int64_t cap = kDefaultEnumerationCap);

/// local_marginal for every vertex, reusing one enumerator.
MarginalTable local_marginals(const Graph& g, int l, const Kernel& kernel, const Instance& inst,
                              std::int64_t cap = kDefaultEnumerationCap);
MarginalTable local_marginals(const std::vector<Ball>& balls, const Kernel& kernel,
                              const Instance& inst, PosteriorEnumerator& enumerator);

enum class BpPath { automatic, generic, zq };

/// Exact sum-product on a tree (upward then downward pass).
MarginalTable bp_tree_marginals(const Graph& tree, const Kernel& kernel, const Instance& inst,
                                BpPath path = BpPath::automatic);

/// Upward pass restricted to vertices [0, prefix) of a BFS-numbered tree rooted
/// at 0 (a depth truncation of the tree); returns the root marginal.
class RootMessagePass {
 public:
  const std::vector<double>& run(const Graph& tree, const Kernel& kernel, const Instance& inst,
                                 int prefix);

  /// After run: normalized marginal of v >= 1 given its own subtree only.
  const double* subtree_marginal(int v) const { return &belief_[static_cast<std::size_t>(v) * q_]; }

 private:
  int q_ = 0;
  std::vector<double> root_;
  std::vector<double> belief_;
  std::vector<double> message_;
  std::vector<int> parent_;
  std::vector<int> parent_edge_;
  const Graph* cached_tree_ = nullptr;
  int cached_n_ = -1;
};

/// Posterior of theta_u given the observations inside S and fixed labels on
/// the boundary of S; everything outside S is ignored.
std::vector<double> boundary_conditioned_marginal(const Graph& g, const Kernel& kernel, int u,
                                                  const std::vector<int>& S, const Instance& inst,
                                                  const std::map<int, int>& boundary_labels,
                                                  std::int64_t cap = kDefaultEnumerationCap);

PairwiseTable pairwise_posterior(const Graph& g, const Kernel& kernel, const Instance& inst, int u,
                                 int v, std::int64_t cap = kDefaultEnumerationCap);

/// All pairwise tables (u < v) from a single pass, indexed pair_index(n, u, v).
std::vector<PairwiseTable> all_pairwise_posteriors(const Graph& g, const Kernel& kernel,
                                                   const Instance& inst,
                                                   MarginalTable* marginals = nullptr,
                                                   std::int64_t cap = kDefaultEnumerationCap);

inline int pair_index(int n, int u, int v) { return u * n - u * (u + 1) / 2 + (v - u - 1); }

}  // namespace zqsync
