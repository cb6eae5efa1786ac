#include "zqsync/model.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "zqsync/rng.hpp"

namespace zqsync {

Kernel::Kernel(int q, int y_size, std::vector<double> table)
    : q_(q), y_size_(y_size), table_(std::move(table)) {
  if (q < 2 || q > kAlphabetCap) throw std::invalid_argument("Kernel: q out of range");
  if (y_size < 1 || y_size > kAlphabetCap)
    throw std::invalid_argument("Kernel: y_size out of range");
  if (table_.size() != static_cast<std::size_t>(q) * q * y_size)
    throw std::invalid_argument("Kernel: table size mismatch");
  for (int x1 = 0; x1 < q; ++x1) {
    for (int x2 = 0; x2 < q; ++x2) {
      double total = 0.0;
      for (int y = 0; y < y_size; ++y) {
        const double v = (*this)(y, x1, x2);
        if (!(v >= 0.0)) throw std::invalid_argument("Kernel: negative entry");
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("Kernel: row does not sum to 1");
    }
  }
}

bool Kernel::gauge_invariant() const {
  for (int s = 1; s < q_; ++s)
    for (int x1 = 0; x1 < q_; ++x1)
      for (int x2 = 0; x2 < q_; ++x2)
        for (int y = 0; y < y_size_; ++y)
          if ((*this)(y, x1, x2) != (*this)(y, (x1 + s) % q_, (x2 + s) % q_)) return false;
  return true;
}

Kernel kernel_zq(int q, double p) {
  if (q < 2 || q > kAlphabetCap) throw std::invalid_argument("kernel_zq: q out of range");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("kernel_zq: p outside [0,1]");
  std::vector<double> table(static_cast<std::size_t>(q) * q * q);
  for (int x1 = 0; x1 < q; ++x1)
    for (int x2 = 0; x2 < q; ++x2)
      for (int y = 0; y < q; ++y)
        table[(static_cast<std::size_t>(x1) * q + x2) * q + y] =
            (y == ((x1 - x2) % q + q) % q ? 1.0 - p : 0.0) + p / q;
  Kernel k(q, q, std::move(table));
  k.zq_noise_ = p;
  return k;
}

namespace {

int draw_observation(const Kernel& kernel, int x1, int x2, SplitMix64& rng) {
  const double r = rng.uniform();
  double acc = 0.0;
  int last = 0;
  for (int y = 0; y < kernel.y_size(); ++y) {
    const double w = kernel(y, x1, x2);
    if (w <= 0.0) continue;
    last = y;
    acc += w;
    if (r < acc) return y;
  }
  return last;
}

}  // namespace

Instance sample_instance(const Graph& g, const Kernel& kernel,
                         const std::vector<double>& eps_per_vertex,
                         std::uint64_t seed, int root_label) {
  if (static_cast<int>(eps_per_vertex.size()) != g.n)
    throw std::invalid_argument("sample_instance: eps vector length mismatch");
  SplitMix64 rng(seed);
  Instance inst;
  inst.theta0.resize(g.n);
  const auto q = static_cast<std::uint32_t>(kernel.q());
  for (int u = 0; u < g.n; ++u) inst.theta0[u] = static_cast<int>(rng.uniform_int(q));
  if (root_label >= 0 && g.n > 0) inst.theta0[0] = root_label;
  inst.y.resize(g.edges.size());
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    inst.y[e] = draw_observation(kernel, inst.theta0[u], inst.theta0[v], rng);
  }
  inst.xi.resize(g.n);
  for (int u = 0; u < g.n; ++u) {
    const double eps = eps_per_vertex[u];
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("sample_instance: eps outside [0,1]");
    inst.xi[u] = rng.bernoulli(eps) ? inst.theta0[u] : kErased;
  }
  return inst;
}

Instance sample_instance(const Graph& g, const Kernel& kernel, double eps,
                         std::uint64_t seed) {
  return sample_instance(g, kernel, std::vector<double>(g.n, eps), seed);
}

Instance restrict_instance(const Instance& inst, const Ball& b) {
  Instance out;
  out.theta0.reserve(b.vertices.size());
  out.xi.reserve(b.vertices.size());
  for (int v : b.vertices) {
    out.theta0.push_back(inst.theta0.empty() ? 0 : inst.theta0[v]);
    out.xi.push_back(inst.xi[v]);
  }
  out.y.reserve(b.edge_ids.size());
  for (int e : b.edge_ids) out.y.push_back(inst.y[e]);
  return out;
}

bool side_channel_consistent(const Instance& inst) {
  for (std::size_t u = 0; u < inst.xi.size(); ++u)
    if (inst.xi[u] != kErased && inst.xi[u] != inst.theta0[u]) return false;
  return true;
}

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

ChannelStatistics channel_statistics(const Kernel& kernel) {
  const int q = kernel.q();
  const double w = 1.0 / (static_cast<double>(q) * q);
  std::vector<double> py(kernel.y_size(), 0.0);
  double h_cond = 0.0;
  double max_entry = 0.0;
  double min_entry = std::numeric_limits<double>::infinity();
  for (int x1 = 0; x1 < q; ++x1) {
    for (int x2 = 0; x2 < q; ++x2) {
      for (int y = 0; y < kernel.y_size(); ++y) {
        const double v = kernel(y, x1, x2);
        py[y] += w * v;
        h_cond -= w * xlogx(v);
        max_entry = std::max(max_entry, v);
        min_entry = std::min(min_entry, v);
      }
    }
  }
  double h_y = 0.0;
  for (double v : py) h_y -= xlogx(v);
  ChannelStatistics s;
  s.h_y = h_y;
  s.h_y_given_theta = h_cond;
  s.mutual_information = std::max(0.0, h_y - h_cond);
  s.c_m = min_entry > 0.0 ? std::max(max_entry, 1.0 / min_entry)
                          : std::numeric_limits<double>::infinity();
  return s;
}

double channel_mutual_information(const Kernel& kernel) {
  return channel_statistics(kernel).mutual_information;
}

void write_kernel(std::ostream& os, const Kernel& kernel) {
  os.precision(17);
  os << kernel.q() << ' ' << kernel.y_size() << '\n';
  const auto& t = kernel.table();
  for (std::size_t row = 0; row < t.size() / kernel.y_size(); ++row) {
    for (int y = 0; y < kernel.y_size(); ++y) {
      if (y) os << ' ';
      os << t[row * kernel.y_size() + y];
    }
    os << '\n';
  }
}

Kernel read_kernel(std::istream& is) {
  int q = 0, y_size = 0;
  if (!(is >> q >> y_size)) throw std::runtime_error("read_kernel: bad header");
  if (q < 2 || q > kAlphabetCap || y_size < 1 || y_size > kAlphabetCap)
    throw std::runtime_error("read_kernel: alphabet size out of range");
  std::vector<double> table(static_cast<std::size_t>(q) * q * y_size);
  for (double& v : table)
    if (!(is >> v)) throw std::runtime_error("read_kernel: truncated table");
  return Kernel(q, y_size, std::move(table));
}

}  // namespace zqsync
