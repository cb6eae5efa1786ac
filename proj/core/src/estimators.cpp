#include "zqsync/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "zqsync/rng.hpp"

namespace zqsync {

bool LabelFunction::zero_mean(double tol) const {
  double s = 0.0;
  for (double v : values) s += v;
  return std::abs(s) <= tol;
}

bool LabelFunction::unit_variance(double tol) const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::abs(s / q() - 1.0) <= tol;
}

double LabelFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

LabelFunction default_label_function(int q) {
  if (q < 2) throw std::invalid_argument("default_label_function: q must be >= 2");
  LabelFunction f;
  if (q == 2) {
    f.values = {1.0, -1.0};
    return f;
  }
  f.values.resize(q);
  for (int x = 0; x < q; ++x) f.values[x] = std::sqrt(2.0) * std::cos(2.0 * std::numbers::pi * x / q);
  return f;
}

EstimateMatrix EstimateMatrix::from_factor(std::vector<double> a) {
  EstimateMatrix m;
  m.n = static_cast<int>(a.size());
  m.rank_one = true;
  m.factor = std::move(a);
  return m;
}

EstimateMatrix EstimateMatrix::zero(int n) { return from_factor(std::vector<double>(n, 0.0)); }

std::vector<double> score_vector(const MarginalTable& marginals, const LabelFunction& f) {
  std::vector<double> a(marginals.size(), 0.0);
  for (std::size_t u = 0; u < marginals.size(); ++u) {
    if (static_cast<int>(marginals[u].size()) != f.q())
      throw std::invalid_argument("score_vector: alphabet size mismatch");
    for (int x = 0; x < f.q(); ++x) a[u] += marginals[u][x] * f(x);
  }
  return a;
}

EstimateMatrix matrix_local(const Graph& g, const Kernel& kernel, const Instance& inst, int l,
                            const LabelFunction& f, std::int64_t cap) {
  return EstimateMatrix::from_factor(score_vector(local_marginals(g, l, kernel, inst, cap), f));
}

EstimateMatrix matrix_decoupled(const Graph& g, const Kernel& kernel, const Instance& inst,
                                const LabelFunction& f, std::int64_t cap) {
  return EstimateMatrix::from_factor(score_vector(exact_posterior_marginals(g, kernel, inst, cap), f));
}

EstimateMatrix matrix_bayes(const std::vector<PairwiseTable>& pairs, const MarginalTable& marginals,
                            const LabelFunction& f) {
  const int n = static_cast<int>(marginals.size());
  const int q = f.q();
  EstimateMatrix m;
  m.n = n;
  m.rank_one = false;
  m.dense.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int u = 0; u < n; ++u) {
    double d = 0.0;
    for (int x = 0; x < q; ++x) d += marginals[u][x] * f(x) * f(x);
    m.dense[static_cast<std::size_t>(u) * n + u] = d;
  }
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      const auto& t = pairs[pair_index(n, u, v)];
      double s = 0.0;
      for (int x = 0; x < q; ++x)
        for (int xp = 0; xp < q; ++xp) s += t[x][xp] * f(x) * f(xp);
      m.dense[static_cast<std::size_t>(u) * n + v] = s;
      m.dense[static_cast<std::size_t>(v) * n + u] = s;
    }
  return m;
}

EstimateMatrix matrix_bayes(const Graph& g, const Kernel& kernel, const Instance& inst,
                            const LabelFunction& f, std::int64_t cap) {
  MarginalTable marginals;
  const auto pairs = all_pairwise_posteriors(g, kernel, inst, &marginals, cap);
  return matrix_bayes(pairs, marginals, f);
}

std::vector<int> sample_labels(const MarginalTable& marginals, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<int> out(marginals.size());
  for (std::size_t u = 0; u < marginals.size(); ++u) out[u] = rng.categorical(marginals[u]);
  return out;
}

EdgeEmpirical edge_empirical(const Graph& g, const std::vector<int>& labels,
                             const std::vector<int>& y, int q, int y_size) {
  if (g.num_edges() == 0) throw std::invalid_argument("edge_empirical: empty edge set");
  if (static_cast<int>(labels.size()) != g.n || static_cast<int>(y.size()) != g.num_edges())
    throw std::invalid_argument("edge_empirical: size mismatch");
  EdgeEmpirical emp;
  emp.q = q;
  emp.y_size = y_size;
  emp.num_edges = g.num_edges();
  std::vector<int> counts(static_cast<std::size_t>(q) * q * y_size, 0);
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    ++counts[(static_cast<std::size_t>(labels[u]) * q + labels[v]) * y_size + y[e]];
  }
  emp.p.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    emp.p[i] = static_cast<double>(counts[i]) / emp.num_edges;
  return emp;
}

std::vector<double> population_edge_law(const Kernel& kernel) {
  const int q = kernel.q();
  std::vector<double> nu(static_cast<std::size_t>(q) * q * kernel.y_size());
  const double w = 1.0 / (static_cast<double>(q) * q);
  for (int x1 = 0; x1 < q; ++x1)
    for (int x2 = 0; x2 < q; ++x2)
      for (int y = 0; y < kernel.y_size(); ++y)
        nu[(static_cast<std::size_t>(x1) * q + x2) * kernel.y_size() + y] = w * kernel(y, x1, x2);
  return nu;
}

double edge_tv_to_population(const EdgeEmpirical& emp, const Kernel& kernel) {
  const auto nu = population_edge_law(kernel);
  if (nu.size() != emp.p.size()) throw std::invalid_argument("edge_tv_to_population: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) s += std::abs(emp.p[i] - nu[i]);
  return 0.5 * s;
}

double default_eta(int n) { return std::log(static_cast<double>(n)) / std::sqrt(static_cast<double>(n)); }

namespace {

std::vector<int> posterior_draw(const Graph& g, const Kernel& kernel, const Instance& inst,
                                std::uint64_t seed, std::int64_t cap) {
  SplitMix64 rng(seed);
  PosteriorEnumerator en(cap);
  std::vector<int> pinned = inst.xi;
  for (int u = 0; u < g.n; ++u) {
    if (pinned[u] != kErased) continue;
    const auto& post = en.run(g, kernel, inst.y, pinned, {{u}}, false);
    pinned[u] = rng.categorical(post.groups[0]);
  }
  return pinned;
}

}  // namespace

TypicalResult typical_set_estimator(const Graph& g, const Kernel& kernel, const Instance& inst,
                                    double eta, TypicalMode mode, std::uint64_t seed,
                                    std::int64_t cap) {
  const int n = g.n;
  const int q = kernel.q();
  const int ys = kernel.y_size();
  const int m = g.num_edges();
  if (m == 0) throw std::invalid_argument("typical_set_estimator: empty edge set");
  if (static_cast<int>(inst.xi.size()) != n || static_cast<int>(inst.y.size()) != m)
    throw std::invalid_argument("typical_set_estimator: instance size mismatch");

  TypicalResult res;
  if (mode == TypicalMode::posterior_sample) {
    res.labels = posterior_draw(g, kernel, inst, seed, cap);
    res.tv = edge_tv_to_population(edge_empirical(g, res.labels, inst.y, q, ys), kernel);
    res.found = res.tv <= eta;
    res.scanned = 1;
    return res;
  }

  std::vector<int> free;
  std::vector<int> labels(n, 0);
  for (int u = 0; u < n; ++u) {
    if (inst.xi[u] == kErased) {
      free.push_back(u);
    } else {
      labels[u] = inst.xi[u];
    }
  }
  const double required = power_count(q, static_cast<int>(free.size()));
  if (required > static_cast<double>(cap)) throw CapExceeded("typical set scan", required, static_cast<double>(cap));

  const auto nu = population_edge_law(kernel);
  std::vector<int> counts(nu.size(), 0);
  auto cell = [&](int e) {
    auto [u, v] = g.edges[e];
    return (static_cast<std::size_t>(labels[u]) * q + labels[v]) * ys + inst.y[e];
  };
  for (int e = 0; e < m; ++e) ++counts[cell(e)];
  const double inv_m = 1.0 / m;
  long double abs_sum = 0.0L;
  for (std::size_t i = 0; i < nu.size(); ++i) abs_sum += std::abs(counts[i] * inv_m - nu[i]);
  auto exact_tv = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) s += std::abs(counts[i] * inv_m - nu[i]);
    return 0.5 * s;
  };
  auto bump = [&](std::size_t i, int delta) {
    abs_sum -= std::abs(counts[i] * inv_m - nu[i]);
    counts[i] += delta;
    abs_sum += std::abs(counts[i] * inv_m - nu[i]);
  };

  constexpr double kSlack = 1e-9;
  constexpr double kTie = 1e-12;
  bool have = false;
  double best_tv = 0.0;
  std::vector<int> best;

  std::vector<std::vector<int>> incident(n);
  for (int e = 0; e < m; ++e) {
    auto [u, v] = g.edges[e];
    incident[u].push_back(e);
    if (v != u) incident[v].push_back(e);
  }

  GrayCounter counter;
  counter.reset(static_cast<int>(free.size()), q);
  for (;;) {
    ++res.scanned;
    const double approx = 0.5 * static_cast<double>(abs_sum);
    const double bar = (mode == TypicalMode::first_lex) ? eta : (have ? best_tv : eta);
    if (approx <= bar + kSlack) {
      const double d = exact_tv();
      if (mode == TypicalMode::first_lex) {
        if (d <= eta && (!have || labels < best)) {
          have = true;
          best = labels;
          best_tv = d;
        }
      } else if (d <= eta) {
        if (!have || d < best_tv - kTie || (std::abs(d - best_tv) <= kTie && labels < best)) {
          have = true;
          best = labels;
          best_tv = d;
        }
      }
    }
    int delta = 0;
    const int j = counter.next(delta);
    if (j < 0) break;
    const int v = free[j];
    for (int e : incident[v]) bump(cell(e), -1);
    labels[v] += delta;
    for (int e : incident[v]) bump(cell(e), +1);
  }

  if (have) {
    res.found = true;
    res.labels = best;
    res.tv = best_tv;
  } else {
    res.found = false;
    res.labels.assign(n, 0);
    res.tv = edge_tv_to_population(edge_empirical(g, res.labels, inst.y, q, ys), kernel);
  }
  return res;
}

}  // namespace zqsync
