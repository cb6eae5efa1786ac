#include "zqsync/graphs.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "zqsync/rng.hpp"

namespace zqsync {

Graph make_graph(int n, std::vector<std::pair<int, int>> edges) {
  if (n < 0) throw std::invalid_argument("make_graph: negative vertex count");
  Graph g;
  g.n = n;
  g.edges = std::move(edges);
  g.adjacency.assign(n, {});
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw std::invalid_argument("make_graph: edge endpoint out of range");
    g.adjacency[u].push_back({v, e, true});
    g.adjacency[v].push_back({u, e, false});
  }
  g.simple = is_simple(g);
  return g;
}

bool is_simple(const Graph& g) {
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : g.edges) {
    if (u == v) return false;
    if (!seen.insert({std::min(u, v), std::max(u, v)}).second) return false;
  }
  return true;
}

bool is_connected(const Graph& g) {
  if (g.n == 0) return true;
  auto dist = bfs_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

bool is_tree(const Graph& g) {
  return g.n >= 1 && g.num_edges() == g.n - 1 && is_connected(g);
}

bool is_consistent(const Graph& g) {
  if (static_cast<int>(g.adjacency.size()) != g.n) return false;
  std::vector<int> tail_seen(g.edges.size(), 0), head_seen(g.edges.size(), 0);
  for (int u = 0; u < g.n; ++u) {
    for (const auto& inc : g.adjacency[u]) {
      if (inc.edge < 0 || inc.edge >= g.num_edges()) return false;
      auto [a, b] = g.edges[inc.edge];
      if (inc.outgoing) {
        if (a != u || b != inc.neighbor) return false;
        ++tail_seen[inc.edge];
      } else {
        if (b != u || a != inc.neighbor) return false;
        ++head_seen[inc.edge];
      }
    }
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (tail_seen[e] != 1 || head_seen[e] != 1) return false;
  return true;
}

Graph gen_torus(int d, int L, bool periodic) {
  if (d < 1) throw std::invalid_argument("gen_torus: d must be >= 1");
  if (L < 2) throw std::invalid_argument("gen_torus: L must be >= 2");
  if (periodic && L < 3)
    throw std::invalid_argument("gen_torus: L < 3 would create multi-edges");
  std::int64_t n = 1;
  for (int i = 0; i < d; ++i) {
    n *= L;
    if (n > std::numeric_limits<int>::max() / (2 * d + 1))
      throw std::invalid_argument("gen_torus: L^d overflows");
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(n) * d);
  for (int u = 0; u < n; ++u) {
    int stride = 1;
    int rest = u;
    for (int axis = 0; axis < d; ++axis) {
      const int c = rest % L;
      rest /= L;
      if (c + 1 < L) {
        edges.emplace_back(u, u + stride);
      } else if (periodic) {
        edges.emplace_back(u, u - c * stride);
      }
      stride *= L;
    }
  }
  return make_graph(static_cast<int>(n), std::move(edges));
}

Graph gen_cycle(int n) {
  if (n < 3) throw std::invalid_argument("gen_cycle: n must be >= 3");
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) edges.emplace_back(u, (u + 1) % n);
  return make_graph(n, std::move(edges));
}

Graph gen_path(int n) {
  if (n < 1) throw std::invalid_argument("gen_path: n must be >= 1");
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u + 1 < n; ++u) edges.emplace_back(u, u + 1);
  return make_graph(n, std::move(edges));
}

namespace {

Graph random_matching(int n, int k, SplitMix64& rng) {
  const int half = n * k;
  std::vector<int> perm(half);
  for (int i = 0; i < half; ++i) perm[i] = i;
  for (int i = half - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(i + 1)));
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(half / 2);
  for (int i = 0; i < half; i += 2) edges.emplace_back(perm[i] % n, perm[i + 1] % n);
  return make_graph(n, std::move(edges));
}

void check_regular_args(int n, int k) {
  if (k < 3) throw std::invalid_argument("gen_random_regular: k must be >= 3");
  if (n <= k) throw std::invalid_argument("gen_random_regular: need n > k");
  if ((static_cast<std::int64_t>(n) * k) % 2 != 0)
    throw std::invalid_argument("gen_random_regular: n*k must be even");
  if (static_cast<std::int64_t>(n) * k > std::numeric_limits<int>::max())
    throw std::invalid_argument("gen_random_regular: n*k too large");
}

}  // namespace

Graph gen_random_regular(int n, int k, std::uint64_t seed, RegularOptions opts) {
  check_regular_args(n, k);
  SplitMix64 rng(seed);
  if (!opts.require_simple) return random_matching(n, k, rng);
  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    Graph g = random_matching(n, k, rng);
    if (g.simple) return g;
  }
  std::ostringstream msg;
  msg << "gen_random_regular: no simple graph after " << opts.max_attempts
      << " attempts (acceptance rate estimate < " << 1.0 / opts.max_attempts << ")";
  throw std::runtime_error(msg.str());
}

double simple_acceptance_rate(int n, int k, int draws, std::uint64_t seed) {
  check_regular_args(n, k);
  if (draws < 1) throw std::invalid_argument("simple_acceptance_rate: draws < 1");
  int accepted = 0;
  for (int i = 0; i < draws; ++i) {
    SplitMix64 rng(derive_seed(seed, hash_name("simple_acceptance"), i));
    if (random_matching(n, k, rng).simple) ++accepted;
  }
  return static_cast<double>(accepted) / draws;
}

std::int64_t tree_size(int root_children, int branching, int depth) {
  if (depth == 0) return 1;
  std::int64_t total = 1;
  std::int64_t level = root_children;
  for (int l = 1; l <= depth; ++l) {
    total += level;
    if (total > (std::int64_t{1} << 40)) return -1;
    level *= branching;
  }
  return total;
}

namespace {

Graph build_tree(int root_children, int branching, int depth, std::int64_t cap) {
  if (depth < 0) throw std::invalid_argument("tree: depth must be >= 0");
  const std::int64_t size = tree_size(root_children, branching, depth);
  if (size < 0 || size > cap) {
    std::ostringstream msg;
    msg << "tree: vertex count exceeds cap " << cap;
    throw std::invalid_argument(msg.str());
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(size - 1));
  int next = 1;
  int level_begin = 0, level_end = 1;
  for (int l = 0; l < depth; ++l) {
    for (int u = level_begin; u < level_end; ++u) {
      const int children = (u == 0) ? root_children : branching;
      for (int c = 0; c < children; ++c) edges.emplace_back(u, next++);
    }
    level_begin = level_end;
    level_end = next;
  }
  return make_graph(static_cast<int>(size), std::move(edges));
}

}  // namespace

Graph gen_tree(int k, int depth, std::int64_t vertex_cap) {
  if (k < 2) throw std::invalid_argument("gen_tree: k must be >= 2");
  return build_tree(k, k - 1, depth, vertex_cap);
}

Graph gen_ary_tree(int branching, int depth, std::int64_t vertex_cap) {
  if (branching < 1) throw std::invalid_argument("gen_ary_tree: branching must be >= 1");
  return build_tree(branching, branching, depth, vertex_cap);
}

std::vector<int> bfs_distances(const Graph& g, int source) {
  std::vector<int> dist(g.n, -1);
  std::queue<int> queue;
  dist[source] = 0;
  queue.push(source);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (const auto& inc : g.adjacency[u]) {
      if (dist[inc.neighbor] < 0) {
        dist[inc.neighbor] = dist[u] + 1;
        queue.push(inc.neighbor);
      }
    }
  }
  return dist;
}

namespace {

void fill_subgraph(const Graph& g, Ball& b) {
  b.index_map.clear();
  b.index_map.reserve(b.vertices.size() * 2);
  for (std::size_t i = 0; i < b.vertices.size(); ++i)
    b.index_map.emplace(b.vertices[i], static_cast<int>(i));
  std::vector<std::pair<int, int>> edges;
  b.edge_ids.clear();
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    auto iu = b.index_map.find(u);
    if (iu == b.index_map.end()) continue;
    auto iv = b.index_map.find(v);
    if (iv == b.index_map.end()) continue;
    edges.emplace_back(iu->second, iv->second);
    b.edge_ids.push_back(e);
  }
  b.subgraph = make_graph(static_cast<int>(b.vertices.size()), std::move(edges));
}

}  // namespace

Ball ball(const Graph& g, int u, int l) {
  if (u < 0 || u >= g.n) throw std::invalid_argument("ball: vertex out of range");
  if (l < 0) throw std::invalid_argument("ball: negative radius");
  Ball b;
  b.center = u;
  b.radius = l;
  std::unordered_map<int, int> dist;
  dist.emplace(u, 0);
  b.vertices.push_back(u);
  b.distance.push_back(0);
  for (std::size_t head = 0; head < b.vertices.size(); ++head) {
    const int x = b.vertices[head];
    const int dx = b.distance[head];
    if (dx == l) continue;
    for (const auto& inc : g.adjacency[x]) {
      if (dist.emplace(inc.neighbor, dx + 1).second) {
        b.vertices.push_back(inc.neighbor);
        b.distance.push_back(dx + 1);
      }
    }
  }
  fill_subgraph(g, b);
  return b;
}

std::vector<Ball> all_balls(const Graph& g, int l) {
  std::vector<Ball> out;
  out.reserve(g.n);
  for (int u = 0; u < g.n; ++u) out.push_back(ball(g, u, l));
  return out;
}

Ball induced_subgraph(const Graph& g, const std::vector<int>& vertices) {
  Ball b;
  b.center = vertices.empty() ? -1 : vertices.front();
  b.radius = -1;
  b.vertices = vertices;
  for (int v : vertices)
    if (v < 0 || v >= g.n) throw std::invalid_argument("induced_subgraph: vertex out of range");
  fill_subgraph(g, b);
  if (static_cast<int>(b.index_map.size()) != b.subgraph.n)
    throw std::invalid_argument("induced_subgraph: repeated vertex");
  return b;
}

std::vector<int> boundary(const Graph& g, const std::vector<int>& S) {
  std::vector<char> in(g.n, 0);
  for (int u : S) {
    if (u < 0 || u >= g.n) throw std::invalid_argument("boundary: vertex out of range");
    in[u] = 1;
  }
  std::vector<int> out;
  for (int u = 0; u < g.n; ++u) {
    if (!in[u]) continue;
    for (const auto& inc : g.adjacency[u]) {
      if (!in[inc.neighbor]) {
        out.push_back(u);
        break;
      }
    }
  }
  return out;
}

std::vector<int> torus_subbox(int d, int L, int m) {
  if (m < 0 || m > L) throw std::invalid_argument("torus_subbox: need 0 <= m <= L");
  std::vector<int> out;
  std::int64_t n = 1;
  for (int i = 0; i < d; ++i) n *= L;
  for (int u = 0; u < n; ++u) {
    int rest = u;
    bool inside = true;
    for (int axis = 0; axis < d && inside; ++axis) {
      inside = (rest % L) < m;
      rest /= L;
    }
    if (inside) out.push_back(u);
  }
  return out;
}

void write_graph(std::ostream& os, const Graph& g) {
  os << g.n << ' ' << g.num_edges() << '\n';
  for (auto [u, v] : g.edges) os << u << ' ' << v << '\n';
}

Graph read_graph(std::istream& is) {
  long long n = -1, m = -1;
  if (!(is >> n >> m) || n < 0 || m < 0)
    throw std::runtime_error("read_graph: bad header");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    int u, v;
    if (!(is >> u >> v)) throw std::runtime_error("read_graph: truncated edge list");
    edges.emplace_back(u, v);
  }
  return make_graph(static_cast<int>(n), std::move(edges));
}

}  // namespace zqsync
