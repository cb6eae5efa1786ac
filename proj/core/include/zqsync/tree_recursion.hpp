#pragma once

#include <cstdint>
#include <vector>

#include "zqsync/metrics.hpp"

namespace zqsync {

/// ary: every vertex (root included) has k-1 children.
/// regular: the root has k children, the others k-1.
enum class TreeKind { ary, regular };

struct LevelRecord {
  int l = 0;
  MCEstimate z_hat;     // mu_root(theta_root) - 1/q, root side channel erased
  MCEstimate dtv2;      // d_TV(mu_root, uniform)^2
  MCEstimate l2sq;      // ||mu_root - uniform||_2^2
  MCEstimate l2_minus_z;  // per-trial l2sq - z_hat
  // Paired residual between depth l+1 at the root and depth l at its children;
  // its mean is z_{l+1} - eps kappa (q-1)/q - (1 - eps) kappa z_l.
  MCEstimate residual;
  bool has_residual = false;
};

struct RecursionTrace {
  TreeKind kind = TreeKind::ary;
  int k = 3;
  int q = 2;
  double p = 0.0;
  double eps = 0.0;
  double kappa = 0.0;
  std::vector<LevelRecord> levels;
};

struct RecursionOptions {
  std::int64_t trials = 1000;
  std::uint64_t seed = 1;
  int jobs = 1;
  /// Fix the root label (reweighting checks); -1 draws it uniformly.
  int root_label = -1;
  /// Reveal the root side channel with probability eps instead of forcing it erased.
  bool reveal_root = false;
};

RecursionTrace simulate_root_statistic(TreeKind kind, int k, int q, double p, double eps, int l_max,
                                       const RecursionOptions& opts);

struct ResidualPoint {
  int l = 0;
  double r = 0.0;
  double se = 0.0;
  double envelope = 0.0;  // z_l^2 + eps^2
};

struct ResidualFit {
  std::vector<ResidualPoint> points;
  double c_fit = 0.0;  // max_l r_l / (z_l^2 + eps^2)
};

ResidualFit recursion_residual(const RecursionTrace& trace);

/// Envelope constant (C + kappa (q-1)/q) / (4 (1 - kappa)) + 1; infinite when kappa >= 1.
double stability_envelope(double c_fit, double kappa, int q);

/// E[d_TV(mu_root, uniform)^2] including the root's own side channel:
/// eps ((q-1)/q)^2 + (1 - eps) E[d_TV^2 | root erased].
MCEstimate unconditional_dtv2(const LevelRecord& rec, double eps, int q);

struct PhasePoint {
  double p = 0.0;
  double kappa = 0.0;
  double eps = 0.0;
  MCEstimate plateau;
  double ratio = 0.0;  // plateau / eps
};

struct PhaseReport {
  std::vector<PhasePoint> below;
  std::vector<PhasePoint> above;
  double below_ratio_spread = 0.0;  // max ratio / min ratio below the threshold
};

PhaseReport ks_phase_probe(int k, int q, double p_below, double p_above,
                           const std::vector<double>& eps_list, int l_max,
                           const RecursionOptions& opts);

struct ReweightingEntry {
  int x = 0;
  int psi = 0;  // 0..q-1: mu(psi); q..2q-1: mu(psi-q)^2; 2q: constant one
  MCEstimate weighted;     // E[psi(mu) q mu(x)] from unconditioned trials
  MCEstimate conditioned;  // E[psi(mu) | theta_root = x]
  double discrepancy = 0.0;
  double combined_se = 0.0;
};

struct ReweightingReport {
  std::vector<ReweightingEntry> entries;
  double max_discrepancy = 0.0;
  double max_z = 0.0;  // max discrepancy / combined standard error
};

ReweightingReport reweighting_check(int k, int q, double p, double eps, int l,
                                    const RecursionOptions& opts);

}  // namespace zqsync
