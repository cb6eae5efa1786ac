#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "zqsync/estimators.hpp"

namespace zqsync {

/// (1/n^2) || X_f - est ||_F^2 with X_f[u][v] = f(theta0_u) f(theta0_v).
double risk(const EstimateMatrix& est, const std::vector<int>& theta0, const LabelFunction& f);

inline constexpr int kPermutationCap = 8;

/// max over label permutations sigma of (1/n) #{u : theta_hat_u = sigma(theta0_u)}.
double overlap(const std::vector<int>& theta_hat, const std::vector<int>& theta0, int q);

/// q x q joint empirical law, omega[x0][x_hat].
using OverlapDist = std::vector<std::vector<double>>;

OverlapDist joint_vertex_empirical(const std::vector<int>& theta0, const std::vector<int>& theta_hat,
                                   int q);

/// q * sum omega(x, x')^2.
double overlap_lower_bound(const OverlapDist& omega);

double tv_distance(const std::vector<double>& p, const std::vector<double>& r);
double l2_distance(const std::vector<double>& p, const std::vector<double>& r);

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed_base = 0;
};

/// Computes a fixed number of outputs for trial index i from its derived seed.
using TrialFunction = std::function<void(std::int64_t index, std::uint64_t seed, double* out)>;

struct MCOptions {
  std::int64_t trials = 1;
  std::uint64_t seed_base = 0;
  std::uint64_t stream = 0;
  int jobs = 1;
};

/// Runs trials on a worker pool and reduces them in trial order, so the
/// result does not depend on the number of workers. A failing trial aborts
/// the run with its index and seed in the error message.
std::vector<MCEstimate> mc_average(const TrialFunction& fn, int outputs, const MCOptions& opts);

MCEstimate mc_average(const std::function<double(std::uint64_t seed)>& fn, const MCOptions& opts);

/// Seed handed to trial i by mc_average.
std::uint64_t trial_seed(const MCOptions& opts, std::int64_t index);

/// Runs body(i) for i in [0, count) on up to jobs threads.
void parallel_for(std::int64_t count, int jobs, const std::function<void(std::int64_t)>& body);

}  // namespace zqsync
