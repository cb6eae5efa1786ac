#include "zqsync/inference.hpp"

#include <stdexcept>

namespace zqsync {

MarginalTable exact_posterior_marginals(const Graph& g, const Kernel& kernel, const Instance& inst,
                                        std::int64_t cap) {
  PosteriorEnumerator en(cap);
  return en.run(g, kernel, inst.y, inst.xi).marginals;
}

namespace {

const std::vector<double>& center_marginal(const Ball& b, const Kernel& kernel,
                                           const Instance& inst, PosteriorEnumerator& en,
                                           std::vector<int>& y_buf, std::vector<int>& pin_buf) {
  y_buf.clear();
  for (int e : b.edge_ids) y_buf.push_back(inst.y[e]);
  pin_buf.clear();
  for (int v : b.vertices) pin_buf.push_back(inst.xi[v]);
  static const std::vector<std::vector<int>> kCenter{{0}};
  return en.run(b.subgraph, kernel, y_buf, pin_buf, kCenter, false).groups[0];
}

}  // namespace

std::vector<double> local_marginal(const Graph& g, int u, int l, const Kernel& kernel,
                                   const Instance& inst, std::int64_t cap) {
  const Ball b = ball(g, u, l);
  PosteriorEnumerator en(cap);
  std::vector<int> y_buf, pin_buf;
  return center_marginal(b, kernel, inst, en, y_buf, pin_buf);
}

MarginalTable local_marginals(const std::vector<Ball>& balls, const Kernel& kernel,
                              const Instance& inst, PosteriorEnumerator& enumerator) {
  MarginalTable out;
  out.reserve(balls.size());
  std::vector<int> y_buf, pin_buf;
  for (const Ball& b : balls) out.push_back(center_marginal(b, kernel, inst, enumerator, y_buf, pin_buf));
  return out;
}

MarginalTable local_marginals(const Graph& g, int l, const Kernel& kernel, const Instance& inst,
                              std::int64_t cap) {
  PosteriorEnumerator en(cap);
  return local_marginals(all_balls(g, l), kernel, inst, en);
}

namespace {

bool use_zq_path(const Kernel& kernel, BpPath path) {
  if (path == BpPath::generic) return false;
  if (path == BpPath::zq) {
    if (!kernel.zq_noise()) throw std::invalid_argument("bp: Z_q path needs a kernel_zq kernel");
    return true;
  }
  return kernel.zq_noise().has_value();
}

// Message to the receiver across an edge with observation y, from the sender's
// belief b. receiver_is_tail is true when the edge is directed receiver -> sender.
void edge_message(const Kernel& kernel, bool zq, int y, bool receiver_is_tail, const double* b,
                  double* out) {
  const int q = kernel.q();
  if (zq) {
    const double p = *kernel.zq_noise();
    double total = 0.0;
    for (int x = 0; x < q; ++x) total += b[x];
    for (int x = 0; x < q; ++x) {
      const int partner = receiver_is_tail ? ((x - y) % q + q) % q : (x + y) % q;
      out[x] = p / q * total + (1.0 - p) * b[partner];
    }
    return;
  }
  for (int xr = 0; xr < q; ++xr) {
    double s = 0.0;
    for (int xs = 0; xs < q; ++xs)
      s += (receiver_is_tail ? kernel(y, xr, xs) : kernel(y, xs, xr)) * b[xs];
    out[xr] = s;
  }
}

void normalize_or_throw(double* v, int q) {
  double total = 0.0;
  for (int x = 0; x < q; ++x) total += v[x];
  if (!(total > 0.0)) throw ZeroLikelihood();
  for (int x = 0; x < q; ++x) v[x] /= total;
}

void set_evidence(double* v, int q, int xi) {
  for (int x = 0; x < q; ++x) v[x] = (xi == kErased || xi == x) ? 1.0 : 0.0;
}

}  // namespace

MarginalTable bp_tree_marginals(const Graph& tree, const Kernel& kernel, const Instance& inst,
                                BpPath path) {
  if (!is_tree(tree)) throw std::invalid_argument("bp_tree_marginals: graph is not a tree");
  const bool zq = use_zq_path(kernel, path);
  const int n = tree.n;
  const int q = kernel.q();

  std::vector<int> order, parent(n, -1), parent_edge(n, -1);
  std::vector<std::vector<int>> children(n);
  std::vector<char> seen(n, 0);
  order.reserve(n);
  order.push_back(0);
  seen[0] = 1;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const int u = order[head];
    for (const auto& inc : tree.adjacency[u]) {
      if (seen[inc.neighbor]) continue;
      seen[inc.neighbor] = 1;
      parent[inc.neighbor] = u;
      parent_edge[inc.neighbor] = inc.edge;
      children[u].push_back(inc.neighbor);
      order.push_back(inc.neighbor);
    }
  }

  auto receiver_is_tail = [&](int receiver, int e) { return tree.edges[e].first == receiver; };

  // up[v]: message from v to its parent; inner[v]: evidence times messages from children.
  std::vector<double> inner(static_cast<std::size_t>(n) * q), up(static_cast<std::size_t>(n) * q);
  for (int v = 0; v < n; ++v) set_evidence(&inner[v * q], q, inst.xi[v]);
  for (int i = n - 1; i >= 1; --i) {
    const int v = order[i];
    normalize_or_throw(&inner[v * q], q);
    const int p = parent[v];
    const int e = parent_edge[v];
    edge_message(kernel, zq, inst.y[e], receiver_is_tail(p, e), &inner[v * q], &up[v * q]);
    normalize_or_throw(&up[v * q], q);
    for (int x = 0; x < q; ++x) inner[p * q + x] *= up[v * q + x];
  }

  // Downward pass; cavity products come from prefix/suffix products over children.
  std::vector<double> down(static_cast<std::size_t>(n) * q, 1.0);
  MarginalTable marg(n, std::vector<double>(q));
  std::vector<double> prefix, suffix, cavity(q);
  for (int i = 0; i < n; ++i) {
    const int v = order[i];
    const auto& ch = children[v];
    const int c = static_cast<int>(ch.size());
    std::vector<double> base(q);
    set_evidence(base.data(), q, inst.xi[v]);
    for (int x = 0; x < q; ++x) base[x] *= down[v * q + x];
    prefix.assign(static_cast<std::size_t>(c + 1) * q, 1.0);
    suffix.assign(static_cast<std::size_t>(c + 1) * q, 1.0);
    for (int j = 0; j < c; ++j)
      for (int x = 0; x < q; ++x) prefix[(j + 1) * q + x] = prefix[j * q + x] * up[ch[j] * q + x];
    for (int j = c - 1; j >= 0; --j)
      for (int x = 0; x < q; ++x) suffix[j * q + x] = suffix[(j + 1) * q + x] * up[ch[j] * q + x];
    for (int x = 0; x < q; ++x) marg[v][x] = base[x] * prefix[c * q + x];
    normalize_or_throw(marg[v].data(), q);
    for (int j = 0; j < c; ++j) {
      for (int x = 0; x < q; ++x) cavity[x] = base[x] * prefix[j * q + x] * suffix[(j + 1) * q + x];
      normalize_or_throw(cavity.data(), q);
      const int child = ch[j];
      const int e = parent_edge[child];
      edge_message(kernel, zq, inst.y[e], receiver_is_tail(child, e), cavity.data(), &down[child * q]);
      normalize_or_throw(&down[child * q], q);
    }
  }
  return marg;
}

const std::vector<double>& RootMessagePass::run(const Graph& tree, const Kernel& kernel,
                                                const Instance& inst, int prefix) {
  const int q = kernel.q();
  if (prefix < 1 || prefix > tree.n) throw std::invalid_argument("RootMessagePass: bad prefix");
  if (cached_tree_ != &tree || cached_n_ != tree.n) {
    parent_.assign(tree.n, -1);
    parent_edge_.assign(tree.n, -1);
    for (int v = 1; v < tree.n; ++v) {
      for (const auto& inc : tree.adjacency[v]) {
        if (inc.neighbor < v) {
          if (parent_[v] >= 0) throw std::invalid_argument("RootMessagePass: not a BFS-numbered tree");
          parent_[v] = inc.neighbor;
          parent_edge_[v] = inc.edge;
        }
      }
      if (parent_[v] < 0) throw std::invalid_argument("RootMessagePass: not a BFS-numbered tree");
    }
    cached_tree_ = &tree;
    cached_n_ = tree.n;
  }
  const bool zq = kernel.zq_noise().has_value();
  q_ = q;
  belief_.resize(static_cast<std::size_t>(prefix) * q);
  message_.resize(q);
  for (int v = 0; v < prefix; ++v) set_evidence(&belief_[v * q], q, inst.xi[v]);
  for (int v = prefix - 1; v >= 1; --v) {
    double* b = &belief_[v * q];
    normalize_or_throw(b, q);
    const int p = parent_[v];
    const int e = parent_edge_[v];
    edge_message(kernel, zq, inst.y[e], tree.edges[e].first == p, b, message_.data());
    double* bp = &belief_[p * q];
    double total = 0.0;
    for (int x = 0; x < q; ++x) {
      bp[x] *= message_[x];
      total += bp[x];
    }
    if (!(total > 0.0)) throw ZeroLikelihood();
    for (int x = 0; x < q; ++x) bp[x] /= total;
  }
  normalize_or_throw(&belief_[0], q);
  root_.assign(belief_.begin(), belief_.begin() + q);
  return root_;
}

std::vector<double> boundary_conditioned_marginal(const Graph& g, const Kernel& kernel, int u,
                                                  const std::vector<int>& S, const Instance& inst,
                                                  const std::map<int, int>& boundary_labels,
                                                  std::int64_t cap) {
  const Ball sub = induced_subgraph(g, S);
  auto it = sub.index_map.find(u);
  if (it == sub.index_map.end()) throw std::invalid_argument("boundary_conditioned_marginal: u not in S");
  Instance local = restrict_instance(inst, sub);
  for (auto [v, label] : boundary_labels) {
    auto iv = sub.index_map.find(v);
    if (iv == sub.index_map.end())
      throw std::invalid_argument("boundary_conditioned_marginal: boundary vertex not in S");
    if (label < 0 || label >= kernel.q())
      throw std::invalid_argument("boundary_conditioned_marginal: bad boundary label");
    int& pin = local.xi[iv->second];
    if (pin != kErased && pin != label) throw ZeroLikelihood();
    pin = label;
  }
  PosteriorEnumerator en(cap);
  return en.run(sub.subgraph, kernel, local.y, local.xi, {{it->second}}, false).groups[0];
}

PairwiseTable pairwise_posterior(const Graph& g, const Kernel& kernel, const Instance& inst, int u,
                                 int v, std::int64_t cap) {
  const int q = kernel.q();
  PairwiseTable out(q, std::vector<double>(q, 0.0));
  PosteriorEnumerator en(cap);
  if (u == v) {
    const auto& post = en.run(g, kernel, inst.y, inst.xi, {{u}}, false);
    for (int x = 0; x < q; ++x) out[x][x] = post.groups[0][x];
    return out;
  }
  const auto& post = en.run(g, kernel, inst.y, inst.xi, {{u, v}}, false);
  for (int x = 0; x < q; ++x)
    for (int xp = 0; xp < q; ++xp) out[x][xp] = post.groups[0][x + q * xp];
  return out;
}

std::vector<PairwiseTable> all_pairwise_posteriors(const Graph& g, const Kernel& kernel,
                                                   const Instance& inst, MarginalTable* marginals,
                                                   std::int64_t cap) {
  const int n = g.n;
  const int q = kernel.q();
  std::vector<std::vector<int>> groups;
  groups.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) groups.push_back({u, v});
  PosteriorEnumerator en(cap);
  const auto& post = en.run(g, kernel, inst.y, inst.xi, groups, marginals != nullptr);
  std::vector<PairwiseTable> out(groups.size(), PairwiseTable(q, std::vector<double>(q)));
  for (std::size_t i = 0; i < groups.size(); ++i)
    for (int x = 0; x < q; ++x)
      for (int xp = 0; xp < q; ++xp) out[i][x][xp] = post.groups[i][x + q * xp];
  if (marginals) *marginals = post.marginals;
  return out;
}

}  // namespace zqsync
