#pragma once

#include <cstdint>
#include <vector>

#include "zqsync/metrics.hpp"
#include "zqsync/model.hpp"

namespace zqsync {

/// kappa = (1 - p)^2 (k - 1); the uniform fixed point is stable when kappa < 1.
double kesten_stigum(int k, double p);

/// Root coefficient k (1 - p)^2 for a root with k children.
double kesten_stigum_root(int k, double p);

/// 2 log q / [(1 - p + p/q) log(p + q(1 - p)) + (1 - 1/q) p log p].
double k_star(double p, int q);

struct WeakRecovery {
  double lhs;  // (k/2) I(theta1, theta2; Y)
  double rhs;  // log q
  bool satisfied;
  double margin;
};

WeakRecovery weak_recovery_condition(const Kernel& kernel, int k);

/// Distribution over (x1, x1~, x2, x2~, y), stored at
/// (((x1 * q + x1~) * q + x2) * q + x2~) * y_size + y.
struct JointEdgeDist {
  int q = 0;
  int y_size = 0;
  std::vector<double> p;

  std::size_t index(int x1, int xt1, int x2, int xt2, int y) const {
    return ((((static_cast<std::size_t>(x1) * q + xt1) * q + x2) * q + xt2) * y_size) + y;
  }
};

/// (pi_1 Omega + pi_2 Omega) / 2 as a q x q table.
OverlapDist pair_average_marginal(const JointEdgeDist& omega);

/// Marginal of (x1, x2, y) (first = true) or (x1~, x2~, y).
std::vector<double> edge_marginal(const JointEdgeDist& omega, bool first);

/// (k/2) H(Omega) - (k-1) H(pair average) - (k/2) H(nu_e) + (k-1) log q.
double s_functional(const JointEdgeDist& omega, int k, const Kernel& kernel);

/// Omega(x1, x2, y) = nu_e(x1, x2, y) 1{x~ = x}.
JointEdgeDist diagonal_coupling(const Kernel& kernel);

/// Omega = nu_e(x1, x2, y) nu_e(x1~, x2~, y) / P(y): both label pairs
/// conditionally independent given y.
JointEdgeDist conditional_independent_coupling(const Kernel& kernel);

/// Uniform product law on X x X.
OverlapDist uniform_product(int q);

struct SStarOptions {
  int restarts = 4;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  int max_iterations = 500;
  int jobs = 1;
};

struct SStarResult {
  double value = 0.0;
  JointEdgeDist argmax;
  double upper_bound = 0.0;
  double feasibility_residual = 0.0;
  int restarts_used = 0;
  std::vector<double> restart_values;
};

/// Upper bound (k/2)(H(nu_e) - H(Y)) - (k-1) H(omega) + (k-1) log q, which
/// equals -(k/2) I + log q at the uniform product omega.
double s_star_upper_bound(const OverlapDist& omega, int k, const Kernel& kernel);

/// Maximizes S over the constraint set. With the pair average fixed the
/// objective is (k/2) H(Omega) plus a constant, so the problem is solved as
/// a maximum-entropy problem through its convex dual (damped Newton), from
/// several starting duals.
SStarResult s_star(const OverlapDist& omega, int k, const Kernel& kernel, const SStarOptions& opts = {});

}  // namespace zqsync
