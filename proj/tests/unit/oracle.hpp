#pragma once

// Brute-force reference computations written independently of the library's
// enumeration engine: plain odometer over all labelings, products of kernel
// entries, no log-domain tricks.

#include <cmath>
#include <vector>

#include "zqsync/graphs.hpp"
#include "zqsync/model.hpp"

namespace oracle {

struct Joint {
  int n = 0;
  int q = 0;
  std::vector<std::vector<int>> labels;
  std::vector<double> weight;  // normalized
};

inline double zq_entry(int q, double p, int y, int x1, int x2) {
  const int d = ((x1 - x2) % q + q) % q;
  return (y == d ? 1.0 - p : 0.0) + p / q;
}

/// Posterior over all labelings given y and the revealed labels.
inline Joint posterior(const zqsync::Graph& g, const zqsync::Kernel& kernel, const std::vector<int>& y,
                       const std::vector<int>& xi) {
  Joint j;
  j.n = g.n;
  j.q = kernel.q();
  std::vector<int> x(g.n, 0);
  double total = 0.0;
  for (;;) {
    bool ok = true;
    for (int u = 0; u < g.n; ++u)
      if (xi[u] >= 0 && xi[u] != x[u]) ok = false;
    if (ok) {
      double w = 1.0;
      for (int e = 0; e < g.num_edges(); ++e) w *= kernel(y[e], x[g.edges[e].first], x[g.edges[e].second]);
      if (w > 0.0) {
        j.labels.push_back(x);
        j.weight.push_back(w);
        total += w;
      }
    }
    int i = g.n - 1;
    while (i >= 0 && ++x[i] == j.q) x[i--] = 0;
    if (i < 0) break;
  }
  for (double& w : j.weight) w /= total;
  return j;
}

inline std::vector<std::vector<double>> marginals(const Joint& j) {
  std::vector<std::vector<double>> m(j.n, std::vector<double>(j.q, 0.0));
  for (std::size_t s = 0; s < j.labels.size(); ++s)
    for (int u = 0; u < j.n; ++u) m[u][j.labels[s][u]] += j.weight[s];
  return m;
}

inline std::vector<std::vector<double>> pair(const Joint& j, int u, int v) {
  std::vector<std::vector<double>> m(j.q, std::vector<double>(j.q, 0.0));
  for (std::size_t s = 0; s < j.labels.size(); ++s) m[j.labels[s][u]][j.labels[s][v]] += j.weight[s];
  return m;
}

inline double max_diff(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a[i].size(); ++k) w = std::max(w, std::abs(a[i][k] - b[i][k]));
  return w;
}

inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

/// E[H(theta_A | Y, xi)] by summing over every observation vector y, every
/// reveal pattern and every revealed labeling, with eps[u] per vertex.
inline double conditional_entropy(const zqsync::Graph& g, const zqsync::Kernel& kernel,
                                  const std::vector<double>& eps, const std::vector<int>& A) {
  const int q = kernel.q(), ys = kernel.y_size(), n = g.n, m = g.num_edges();
  double result = 0.0;
  std::vector<int> theta(n, 0);
  std::vector<int> y(m, 0);
  // Joint P(theta, y, xi) = q^-n prod Q prod side; H(A | y, xi) averaged.
  for (int mask = 0; mask < (1 << n); ++mask) {
    double p_mask = 1.0;
    for (int u = 0; u < n; ++u) p_mask *= (mask >> u & 1) ? eps[u] : 1.0 - eps[u];
    if (p_mask == 0.0) continue;
    std::fill(y.begin(), y.end(), 0);
    for (;;) {
      // Group by revealed labels: iterate theta, bucket by revealed values.
      std::vector<std::vector<double>> buckets;  // indexed by revealed code
      std::vector<int> revealed;
      for (int u = 0; u < n; ++u)
        if (mask >> u & 1) revealed.push_back(u);
      int codes = 1;
      for (std::size_t r = 0; r < revealed.size(); ++r) codes *= q;
      int a_size = 1;
      for (std::size_t r = 0; r < A.size(); ++r) a_size *= q;
      buckets.assign(codes, std::vector<double>(a_size, 0.0));
      std::fill(theta.begin(), theta.end(), 0);
      for (;;) {
        double w = std::pow(1.0 / q, n);
        for (int e = 0; e < m; ++e) w *= kernel(y[e], theta[g.edges[e].first], theta[g.edges[e].second]);
        int code = 0;
        for (int u : revealed) code = code * q + theta[u];
        int a = 0;
        for (int u : A) a = a * q + theta[u];
        buckets[code][a] += w;
        int i = n - 1;
        while (i >= 0 && ++theta[i] == q) theta[i--] = 0;
        if (i < 0) break;
      }
      for (auto& b : buckets) {
        double tot = 0.0;
        for (double v : b) tot += v;
        if (tot <= 0.0) continue;
        std::vector<double> cond(b);
        for (double& v : cond) v /= tot;
        result += p_mask * tot * entropy(cond);
      }
      int i = m - 1;
      while (i >= 0 && ++y[i] == ys) y[i--] = 0;
      if (i < 0) break;
    }
  }
  return result;
}

}  // namespace oracle
