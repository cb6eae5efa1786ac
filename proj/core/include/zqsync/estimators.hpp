#pragma once

#include <cstdint>
#include <vector>

#include "zqsync/enumeration.hpp"
#include "zqsync/graphs.hpp"
#include "zqsync/inference.hpp"
#include "zqsync/model.hpp"

namespace zqsync {

struct LabelFunction {
  std::vector<double> values;

  int q() const { return static_cast<int>(values.size()); }
  double operator()(int x) const { return values[x]; }
  bool zero_mean(double tol = 1e-12) const;
  bool unit_variance(double tol = 1e-12) const;
  double sup_norm() const;
};

/// q = 2: (+1, -1); q >= 3: sqrt(2) cos(2 pi x / q).
LabelFunction default_label_function(int q);

/// n x n estimate, either a rank-one outer product a a^T or a dense matrix.
struct EstimateMatrix {
  int n = 0;
  bool rank_one = true;
  std::vector<double> factor;
  std::vector<double> dense;

  double at(int u, int v) const {
    return rank_one ? factor[u] * factor[v] : dense[static_cast<std::size_t>(u) * n + v];
  }
  static EstimateMatrix from_factor(std::vector<double> a);
  static EstimateMatrix zero(int n);
};

std::vector<double> score_vector(const MarginalTable& marginals, const LabelFunction& f);

EstimateMatrix matrix_local(const Graph& g, const Kernel& kernel, const Instance& inst, int l,
                            const LabelFunction& f, std::int64_t cap = kDefaultEnumerationCap);
EstimateMatrix matrix_decoupled(const Graph& g, const Kernel& kernel, const Instance& inst,
                                const LabelFunction& f, std::int64_t cap = kDefaultEnumerationCap);

/// Posterior mean of f(theta_u) f(theta_v) for every pair.
EstimateMatrix matrix_bayes(const Graph& g, const Kernel& kernel, const Instance& inst,
                            const LabelFunction& f, std::int64_t cap = kDefaultEnumerationCap);
EstimateMatrix matrix_bayes(const std::vector<PairwiseTable>& pairs, const MarginalTable& marginals,
                            const LabelFunction& f);

std::vector<int> sample_labels(const MarginalTable& marginals, std::uint64_t seed);

/// Empirical law of (theta_u, theta_v, Y_uv) over directed edges,
/// p[(x1 * q + x2) * y_size + y].
struct EdgeEmpirical {
  int q = 0;
  int y_size = 0;
  int num_edges = 0;
  std::vector<double> p;
};

EdgeEmpirical edge_empirical(const Graph& g, const std::vector<int>& labels,
                             const std::vector<int>& y, int q, int y_size);

/// nu_e(x1, x2, y) = Q(y | x1, x2) / q^2 in the EdgeEmpirical layout.
std::vector<double> population_edge_law(const Kernel& kernel);

double edge_tv_to_population(const EdgeEmpirical& emp, const Kernel& kernel);

enum class TypicalMode { first_lex, best, posterior_sample };

struct TypicalResult {
  bool found = false;           // a typical assignment was returned
  std::vector<int> labels;      // all zeros when nothing typical exists
  double tv = 0.0;              // distance of the returned labels to the population law
  std::int64_t scanned = 0;
};

/// Exhaustive scan over the assignments consistent with the revealed side
/// information. first_lex returns the lexicographically first typical
/// assignment (vertex 0 most significant), best the minimizer of the distance
/// (lexicographic tie-break), posterior_sample an exact posterior draw with
/// found set to whether it is typical.
TypicalResult typical_set_estimator(const Graph& g, const Kernel& kernel, const Instance& inst,
                                    double eta, TypicalMode mode, std::uint64_t seed = 0,
                                    std::int64_t cap = kDefaultEnumerationCap);

/// (log n) / sqrt(n).
double default_eta(int n);

}  // namespace zqsync
