#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <utility>
#include <vector>

namespace zqsync {

struct Incidence {
  int neighbor;
  int edge;
  bool outgoing;  // true when this vertex is the tail (u) of edge (u,v)
};

struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<Incidence>> adjacency;
  bool simple = true;

  int num_edges() const { return static_cast<int>(edges.size()); }
  int degree(int u) const { return static_cast<int>(adjacency[u].size()); }
};

/// Builds a graph from an edge list; adjacency is filled in edge order.
Graph make_graph(int n, std::vector<std::pair<int, int>> edges);

/// No self-loops and no repeated unordered pairs.
bool is_simple(const Graph& g);
bool is_connected(const Graph& g);
bool is_tree(const Graph& g);

/// Checks the adjacency/edge-list consistency invariant.
bool is_consistent(const Graph& g);

/// d-dimensional torus Z_L^d (or the open box when periodic is false).
/// Axis 0 is the least significant coordinate of a vertex id.
Graph gen_torus(int d, int L, bool periodic = true);

Graph gen_cycle(int n);
Graph gen_path(int n);

struct RegularOptions {
  bool require_simple = true;
  int max_attempts = 100000;
};

/// Configuration model: uniform perfect matching of n*k half-edges,
/// half-edge i belongs to vertex i mod n.
Graph gen_random_regular(int n, int k, std::uint64_t seed,
                         RegularOptions opts = {});

/// Acceptance rate of the simplicity test over independent draws.
double simple_acceptance_rate(int n, int k, int draws, std::uint64_t seed);

inline constexpr std::int64_t kDefaultVertexCap = 1 << 22;

/// k-regular tree truncated at depth: root has k children, others k-1.
/// Vertex ids are in BFS order with root 0; edges point parent to child.
Graph gen_tree(int k, int depth, std::int64_t vertex_cap = kDefaultVertexCap);

/// Pure branching-ary tree, BFS ids, root 0.
Graph gen_ary_tree(int branching, int depth,
                   std::int64_t vertex_cap = kDefaultVertexCap);

/// Number of vertices of gen_tree / gen_ary_tree, -1 on overflow.
std::int64_t tree_size(int root_children, int branching, int depth);

struct Ball {
  int center = 0;
  int radius = 0;
  std::vector<int> vertices;  // BFS order, center first
  std::vector<int> distance;  // distance of vertices[i] from center
  Graph subgraph;
  std::vector<int> edge_ids;  // parent edge id of each subgraph edge
  std::unordered_map<int, int> index_map;
};

Ball ball(const Graph& g, int u, int l);

/// ball(g, u, l) for every vertex u.
std::vector<Ball> all_balls(const Graph& g, int l);

/// Subgraph induced by the listed vertices, re-indexed in list order.
Ball induced_subgraph(const Graph& g, const std::vector<int>& vertices);

std::vector<int> bfs_distances(const Graph& g, int source);

/// Vertices of S having a neighbor outside S, in ascending order.
std::vector<int> boundary(const Graph& g, const std::vector<int>& S);

/// Vertices of the sub-box [0,m)^d of gen_torus(d,L).
std::vector<int> torus_subbox(int d, int L, int m);

void write_graph(std::ostream& os, const Graph& g);
Graph read_graph(std::istream& is);

}  // namespace zqsync
