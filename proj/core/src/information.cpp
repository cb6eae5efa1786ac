#include "zqsync/information.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "zqsync/enumeration.hpp"

namespace zqsync {

bool is_difference_kernel(const Kernel& kernel) {
  const int q = kernel.q();
  if (kernel.y_size() != q) return false;
  for (int x1 = 0; x1 < q; ++x1)
    for (int x2 = 0; x2 < q; ++x2)
      for (int y = 0; y < q; ++y) {
        const int shifted = ((y - x1 + x2) % q + q) % q;
        if (kernel(y, x1, x2) != kernel(shifted, 0, 0)) return false;
      }
  return true;
}

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

namespace {

constexpr int kMaskVertexCap = 24;

struct MaskPlan {
  std::vector<int> pinned;        // label per vertex or kErased
  std::vector<int> free_edges;    // edges whose observation is enumerated
  std::vector<int> kept_edges;    // edges of the reduced graph
  std::vector<int> enumerated_labels;  // revealed vertices whose label is summed over
  double log_scale = 0.0;         // log of the weight factor multiplying Z
};

// Multi-source BFS forest from the revealed set; components without a revealed
// vertex get one root each. Returns the number of such components.
int gauge_forest(const Graph& g, const std::vector<char>& revealed, std::vector<char>& forest_edge) {
  std::vector<char> seen(g.n, 0);
  std::vector<int> queue;
  queue.reserve(g.n);
  forest_edge.assign(g.num_edges(), 0);
  auto grow = [&](std::size_t head) {
    for (; head < queue.size(); ++head) {
      const int u = queue[head];
      for (const auto& inc : g.adjacency[u]) {
        if (seen[inc.neighbor]) continue;
        seen[inc.neighbor] = 1;
        forest_edge[inc.edge] = 1;
        queue.push_back(inc.neighbor);
      }
    }
  };
  for (int u = 0; u < g.n; ++u) {
    if (revealed[u]) {
      seen[u] = 1;
      queue.push_back(u);
    }
  }
  grow(0);
  int unrooted = 0;
  for (int u = 0; u < g.n; ++u) {
    if (seen[u]) continue;
    ++unrooted;
    seen[u] = 1;
    const std::size_t head = queue.size();
    queue.push_back(u);
    grow(head);
  }
  return unrooted;
}

}  // namespace

std::vector<double> conditional_entropies(const Graph& g, const Kernel& kernel,
                                          const std::vector<double>& eps,
                                          const std::vector<std::vector<int>>& groups,
                                          const InformationOptions& opts) {
  const int n = g.n;
  const int q = kernel.q();
  if (static_cast<int>(eps.size()) != n)
    throw std::invalid_argument("conditional_entropies: eps vector length mismatch");
  if (n > kMaskVertexCap) throw CapExceeded("conditional entropies (reveal masks)", std::pow(2.0, n), std::pow(2.0, kMaskVertexCap));
  for (double e : eps)
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("conditional_entropies: eps outside [0,1]");
  for (const auto& grp : groups)
    for (int v : grp)
      if (v < 0 || v >= n) throw std::invalid_argument("conditional_entropies: vertex out of range");

  const bool gauge = !opts.force_direct && is_difference_kernel(kernel);
  const std::uint32_t masks = 1u << n;

  std::vector<MaskPlan> plans;
  double budget = 0.0;
  std::vector<char> revealed(n), forest;
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    double pm = 1.0;
    for (int u = 0; u < n; ++u) pm *= (mask >> u & 1u) ? eps[u] : 1.0 - eps[u];
    if (pm <= 0.0) continue;
    MaskPlan plan;
    int num_revealed = 0;
    for (int u = 0; u < n; ++u) {
      revealed[u] = static_cast<char>(mask >> u & 1u);
      num_revealed += revealed[u];
    }
    plan.pinned.assign(n, kErased);
    int unrooted = 0;
    if (gauge) {
      unrooted = gauge_forest(g, revealed, forest);
      for (int u = 0; u < n; ++u)
        if (revealed[u]) plan.pinned[u] = 0;
    }
    for (int e = 0; e < g.num_edges(); ++e) {
      auto [a, b] = g.edges[e];
      if (revealed[a] && revealed[b]) continue;
      plan.kept_edges.push_back(e);
      if (!(gauge && forest[e])) plan.free_edges.push_back(e);
    }
    if (gauge) {
      plan.log_scale = std::log(pm) - unrooted * std::log(static_cast<double>(q));
    } else {
      for (int u = 0; u < n; ++u)
        if (revealed[u]) plan.enumerated_labels.push_back(u);
      plan.log_scale = std::log(pm) - n * std::log(static_cast<double>(q));
    }
    budget += power_count(kernel.y_size(), static_cast<int>(plan.free_edges.size())) *
              power_count(q, static_cast<int>(plan.enumerated_labels.size())) * power_count(q, n - num_revealed);
    if (budget > opts.cap) throw CapExceeded("conditional entropies", budget, opts.cap);
    plans.push_back(std::move(plan));
  }

  std::vector<double> out(groups.size(), 0.0);
  PosteriorEnumerator en(static_cast<std::int64_t>(std::min(opts.cap, 9.0e18)));
  for (const MaskPlan& plan : plans) {
    // Reduced graph without edges joining two revealed vertices; those
    // observations sum out to one and do not affect the posterior.
    std::vector<std::pair<int, int>> edges;
    std::vector<int> local_of(g.num_edges(), -1);
    for (int e : plan.kept_edges) {
      local_of[e] = static_cast<int>(edges.size());
      edges.push_back(g.edges[e]);
    }
    const Graph reduced = make_graph(n, std::move(edges));
    std::vector<int> y(reduced.num_edges(), 0);
    std::vector<int> pinned = plan.pinned;
    std::vector<int> free_local;
    for (int e : plan.free_edges) free_local.push_back(local_of[e]);
    const int fy = static_cast<int>(free_local.size());
    const int fm = static_cast<int>(plan.enumerated_labels.size());
    std::vector<int> ydig(fy, 0), mdig(fm, 0);
    for (;;) {
      for (int i = 0; i < fm; ++i) pinned[plan.enumerated_labels[i]] = mdig[i];
      for (;;) {
        for (int i = 0; i < fy; ++i) y[free_local[i]] = ydig[i];
        double z = 0.0;
        const Posterior* post = nullptr;
        try {
          post = &en.run(reduced, kernel, y, pinned, groups, false);
          z = std::exp(post->log_z + plan.log_scale);
        } catch (const ZeroLikelihood&) {
          z = 0.0;
        }
        if (z > 0.0)
          for (std::size_t gi = 0; gi < groups.size(); ++gi) out[gi] += z * entropy(post->groups[gi]);
        int i = 0;
        while (i < fy && ++ydig[i] == kernel.y_size()) ydig[i++] = 0;
        if (i == fy) break;
      }
      int i = 0;
      while (i < fm && ++mdig[i] == q) mdig[i++] = 0;
      if (i == fm) break;
    }
  }
  return out;
}

double conditional_mutual_information(const Graph& g, const Kernel& kernel,
                                      const std::vector<double>& eps, int u,
                                      const std::vector<int>& T, const InformationOptions& opts) {
  std::vector<int> joint = T;
  if (std::find(T.begin(), T.end(), u) == T.end()) joint.push_back(u);
  const auto h = conditional_entropies(g, kernel, eps, {{u}, T, joint}, opts);
  return h[0] + h[1] - h[2];
}

double conditional_mutual_information(const Graph& g, const Kernel& kernel, double eps, int u,
                                      const std::vector<int>& T, const InformationOptions& opts) {
  return conditional_mutual_information(g, kernel, std::vector<double>(g.n, eps), u, T, opts);
}

std::vector<std::vector<double>> pairwise_conditional_mi(const Graph& g, const Kernel& kernel,
                                                         double eps,
                                                         const InformationOptions& opts) {
  const int n = g.n;
  std::vector<std::vector<int>> groups;
  for (int u = 0; u < n; ++u) groups.push_back({u});
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) groups.push_back({u, v});
  const auto h = conditional_entropies(g, kernel, std::vector<double>(n, eps), groups, opts);
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  std::size_t idx = n;
  for (int u = 0; u < n; ++u) out[u][u] = h[u];
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      out[u][v] = out[v][u] = h[u] + h[v] - h[idx];
      ++idx;
    }
  return out;
}

}  // namespace zqsync
