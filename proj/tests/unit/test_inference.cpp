#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "oracle.hpp"
#include "zqsync/graphs.hpp"
#include "zqsync/inference.hpp"
#include "zqsync/model.hpp"
#include "zqsync/rng.hpp"

using namespace zqsync;

namespace {

Instance make_instance(std::vector<int> y, std::vector<int> xi) {
  Instance inst;
  inst.theta0.assign(xi.size(), 0);
  inst.y = std::move(y);
  inst.xi = std::move(xi);
  return inst;
}

Graph random_tree(int n, SplitMix64& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) {
    const int parent = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(v)));
    edges.push_back(rng.bernoulli(0.5) ? std::make_pair(parent, v) : std::make_pair(v, parent));
  }
  return make_graph(n, edges);
}

}  // namespace

TEST_CASE("two-vertex hand enumeration") {
  const Graph g = gen_path(2);
  const Kernel k = kernel_zq(2, 0.2);
  const Instance inst = make_instance({0}, {0, kErased});
  const MarginalTable m = exact_posterior_marginals(g, k, inst);
  CHECK(m[1][0] == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(m[1][1] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(m[0][0] == 1.0);
}

TEST_CASE("star with one revealed leaf") {
  // Root 0, leaf 1 revealed as 0, Y = 0: posterior of the root is Q(0 | x, 0) normalized.
  const Graph g = make_graph(2, {{0, 1}});
  const Kernel k = kernel_zq(2, 0.2);
  const Instance inst = make_instance({0}, {kErased, 0});
  for (BpPath path : {BpPath::automatic, BpPath::generic, BpPath::zq}) {
    const MarginalTable m = bp_tree_marginals(g, k, inst, path);
    CHECK(m[0][0] == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(m[0][1] == doctest::Approx(0.1).epsilon(1e-14));
  }
}

TEST_CASE("trivial posteriors") {
  const Graph g = gen_torus(2, 3);
  const Kernel k = kernel_zq(3, 0.4);
  const Instance all = sample_instance(g, k, 1.0, 2);
  const MarginalTable m = exact_posterior_marginals(g, k, all);
  for (int u = 0; u < g.n; ++u) CHECK(m[u][all.theta0[u]] == 1.0);
  const Instance none = sample_instance(g, kernel_zq(3, 1.0), 0.0, 2);
  for (const auto& row : exact_posterior_marginals(g, kernel_zq(3, 1.0), none))
    for (double v : row) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(bp_tree_marginals(gen_path(1), k, make_instance({}, {kErased}))[0][2] == doctest::Approx(1.0 / 3));
}

TEST_CASE("property: exact marginals match brute force on loopy graphs") {
  SplitMix64 rng(21);
  for (int t = 0; t < 30; ++t) {
    const Graph g = t % 3 == 0 ? gen_torus(2, 3) : gen_random_regular(8, 3, rng.next());
    const int q = t % 2 ? 2 : 3;
    if (q == 3 && g.n > 8) continue;
    const Kernel k = kernel_zq(q, 0.05 + 0.9 * rng.uniform());
    const Instance inst = sample_instance(g, k, 0.2, rng.next());
    const auto joint = oracle::posterior(g, k, inst.y, inst.xi);
    CHECK(oracle::max_diff(exact_posterior_marginals(g, k, inst), oracle::marginals(joint)) < 1e-12);
  }
}

TEST_CASE("property: tree BP is exact on random trees") {
  SplitMix64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const int q = 2 + t % 3;
    const int n = q == 2 ? 12 : (q == 3 ? 8 : 6);
    const Graph tree = random_tree(n, rng);
    const Kernel k = kernel_zq(q, rng.uniform());
    const Instance inst = sample_instance(tree, k, 0.3 * rng.uniform(), rng.next());
    const auto truth = oracle::marginals(oracle::posterior(tree, k, inst.y, inst.xi));
    CHECK(oracle::max_diff(bp_tree_marginals(tree, k, inst, BpPath::generic), truth) < 1e-10);
    CHECK(oracle::max_diff(bp_tree_marginals(tree, k, inst, BpPath::zq), truth) < 1e-10);
  }
}

TEST_CASE("tree BP with a general asymmetric kernel") {
  SplitMix64 rng(13);
  const Kernel k(2, 3, {0.7, 0.2, 0.1, 0.1, 0.3, 0.6, 0.25, 0.25, 0.5, 0.4, 0.4, 0.2});
  for (int t = 0; t < 30; ++t) {
    const Graph tree = random_tree(10, rng);
    const Instance inst = sample_instance(tree, k, 0.2, rng.next());
    const auto truth = oracle::marginals(oracle::posterior(tree, k, inst.y, inst.xi));
    CHECK(oracle::max_diff(bp_tree_marginals(tree, k, inst), truth) < 1e-10);
  }
  CHECK_THROWS(bp_tree_marginals(gen_cycle(4), k, sample_instance(gen_cycle(4), k, 0.0, 1)));
}

TEST_CASE("local marginals") {
  const Graph g = gen_torus(2, 4);
  const Kernel k = kernel_zq(2, 0.3);
  const Instance inst = sample_instance(g, k, 0.3, 6);
  const Instance erased = make_instance(inst.y, std::vector<int>(g.n, kErased));
  CHECK(local_marginal(g, 0, 0, k, erased)[0] == 0.5);
  Instance pinned = erased;
  pinned.xi[0] = 1;
  CHECK(local_marginal(g, 0, 0, k, pinned)[1] == 1.0);
  const MarginalTable full = exact_posterior_marginals(g, k, inst);
  const MarginalTable wide = local_marginals(g, 4, k, inst);
  CHECK(oracle::max_diff(full, wide) < 1e-10);
  // Radius 1: brute force on the star around u.
  for (int u : {0, 5, 10}) {
    const Ball b = ball(g, u, 1);
    const Instance r = restrict_instance(inst, b);
    const auto truth = oracle::marginals(oracle::posterior(b.subgraph, k, r.y, r.xi));
    const auto got = local_marginal(g, u, 1, k, inst);
    for (int x = 0; x < 2; ++x) CHECK(got[x] == doctest::Approx(truth[0][x]).epsilon(1e-12));
  }
}

TEST_CASE("root message pass agrees with full BP at every truncation") {
  const Graph tree = gen_tree(3, 4);
  const Kernel k = kernel_zq(3, 0.35);
  const Instance inst = sample_instance(tree, k, 0.2, 9);
  RootMessagePass pass;
  for (int depth = 0; depth <= 4; ++depth) {
    const int prefix = static_cast<int>(tree_size(3, 2, depth));
    std::vector<int> keep(prefix);
    for (int v = 0; v < prefix; ++v) keep[v] = v;
    const Ball sub = induced_subgraph(tree, keep);
    const Instance r = restrict_instance(inst, sub);
    const auto truth = bp_tree_marginals(sub.subgraph, k, r);
    const auto& got = pass.run(tree, k, inst, prefix);
    for (int x = 0; x < 3; ++x) CHECK(got[x] == doctest::Approx(truth[0][x]).epsilon(1e-12));
  }
}

TEST_CASE("boundary conditioned marginal on a cycle arc") {
  const Graph g = gen_cycle(6);
  const Kernel k = kernel_zq(2, 0.3);
  const Instance inst = sample_instance(g, k, 0.0, 12);
  const std::vector<int> S = {1, 2, 3};
  // Path 1-2-3 with 1 and 3 pinned.
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const auto got = boundary_conditioned_marginal(g, k, 2, S, inst, {{1, a}, {3, b}});
      const Ball sub = induced_subgraph(g, S);
      Instance r = restrict_instance(inst, sub);
      r.xi = {a, kErased, b};
      const auto truth = oracle::marginals(oracle::posterior(sub.subgraph, k, r.y, r.xi));
      for (int x = 0; x < 2; ++x) CHECK(got[x] == doctest::Approx(truth[1][x]).epsilon(1e-12));
    }
  const auto point = boundary_conditioned_marginal(g, k, 2, {2}, inst, {{2, 1}});
  CHECK(point[1] == 1.0);
  const Graph path = gen_path(5);
  const Kernel noise = kernel_zq(3, 1.0);
  const Instance pi = sample_instance(path, noise, 0.0, 1);
  const auto flat = boundary_conditioned_marginal(path, noise, 2, {0, 1, 2, 3, 4}, pi, {{0, 2}, {4, 1}});
  for (double v : flat) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("property: pairwise posteriors match brute force") {
  SplitMix64 rng(31);
  for (int t = 0; t < 10; ++t) {
    const Graph g = gen_cycle(6);
    const Kernel k = kernel_zq(3, rng.uniform());
    const Instance inst = sample_instance(g, k, 0.2, rng.next());
    const auto joint = oracle::posterior(g, k, inst.y, inst.xi);
    MarginalTable marg;
    const auto pairs = all_pairwise_posteriors(g, k, inst, &marg);
    CHECK(oracle::max_diff(marg, oracle::marginals(joint)) < 1e-12);
    for (int u = 0; u < g.n; ++u)
      for (int v = u + 1; v < g.n; ++v) {
        CHECK(oracle::max_diff(pairs[pair_index(g.n, u, v)], oracle::pair(joint, u, v)) < 1e-12);
        if (u == 0) CHECK(oracle::max_diff(pairwise_posterior(g, k, inst, u, v), oracle::pair(joint, u, v)) < 1e-12);
      }
    const auto diag = pairwise_posterior(g, k, inst, 2, 2);
    for (int x = 0; x < 3; ++x) CHECK(diag[x][x] == doctest::Approx(marg[2][x]).epsilon(1e-12));
  }
  const Graph g = gen_cycle(5);
  const auto flat = pairwise_posterior(g, kernel_zq(2, 1.0), sample_instance(g, kernel_zq(2, 1.0), 0.0, 3), 0, 2);
  for (const auto& row : flat)
    for (double v : row) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("property: martingale identity holds exactly per observation") {
  // E[mu_l(x) mu_full(x) | ball data] = mu_l(x)^2, checked by averaging over
  // the observations outside the ball exactly on a small graph.
  const Graph g = gen_cycle(5);
  const Kernel k = kernel_zq(2, 0.3);
  const Ball b = ball(g, 0, 1);
  std::vector<int> inside(g.num_edges(), 0);
  for (int e : b.edge_ids) inside[e] = 1;
  Instance base;
  base.theta0.assign(g.n, 0);
  base.xi.assign(g.n, kErased);
  base.y = {1, 0, 0, 0, 0};
  const auto mu_l = local_marginal(g, 0, 1, k, base);
  // P(outside data | inside data) from the joint over the free edges.
  double lhs = 0.0, total = 0.0;
  for (int mask = 0; mask < 8; ++mask) {
    Instance inst = base;
    int bit = 0;
    for (int e = 0; e < g.num_edges(); ++e)
      if (!inside[e]) inst.y[e] = mask >> bit++ & 1;
    const auto joint = oracle::posterior(g, k, inst.y, inst.xi);
    // Unnormalized likelihood of this y.
    double like = 0.0;
    std::vector<int> x(g.n, 0);
    for (int c = 0; c < 32; ++c) {
      double w = 1.0;
      for (int u = 0; u < g.n; ++u) x[u] = c >> u & 1;
      for (int e = 0; e < g.num_edges(); ++e) w *= k(inst.y[e], x[g.edges[e].first], x[g.edges[e].second]);
      like += w;
    }
    lhs += like * oracle::marginals(joint)[0][0];
    total += like;
  }
  CHECK(lhs / total * mu_l[0] == doctest::Approx(mu_l[0] * mu_l[0]).epsilon(1e-12));
}
