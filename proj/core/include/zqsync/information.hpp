#pragma once

#include <cstdint>
#include <vector>

#include "zqsync/graphs.hpp"
#include "zqsync/model.hpp"

namespace zqsync {

struct InformationOptions {
  /// Budget on total labelings visited across all observation outcomes.
  double cap = 4.0e9;
  /// Skip the gauge reduction even when the kernel allows it.
  bool force_direct = false;
};

/// True when Q(y | x1, x2) depends only on y - (x1 - x2) mod q (y_size == q).
/// Such kernels allow the gauge reduction used by conditional_entropies.
bool is_difference_kernel(const Kernel& kernel);

/// E[H(theta_A | Y, xi)] in nats for each vertex group A, exact, where vertex u
/// is revealed independently with probability eps[u].
std::vector<double> conditional_entropies(const Graph& g, const Kernel& kernel,
                                          const std::vector<double>& eps,
                                          const std::vector<std::vector<int>>& groups,
                                          const InformationOptions& opts = {});

/// I(theta_u ; theta_T | Y, xi) in nats.
double conditional_mutual_information(const Graph& g, const Kernel& kernel,
                                      const std::vector<double>& eps, int u,
                                      const std::vector<int>& T,
                                      const InformationOptions& opts = {});
double conditional_mutual_information(const Graph& g, const Kernel& kernel, double eps, int u,
                                      const std::vector<int>& T,
                                      const InformationOptions& opts = {});

/// n x n matrix of I(theta_u ; theta_v | Y, xi); the diagonal holds H(theta_u | Y, xi).
std::vector<std::vector<double>> pairwise_conditional_mi(const Graph& g, const Kernel& kernel,
                                                         double eps,
                                                         const InformationOptions& opts = {});

/// Shannon entropy in nats with 0 log 0 = 0.
double entropy(const std::vector<double>& p);

}  // namespace zqsync
