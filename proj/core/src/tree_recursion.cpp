#include "zqsync/tree_recursion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "zqsync/graphs.hpp"
#include "zqsync/inference.hpp"
#include "zqsync/model.hpp"
#include "zqsync/rng.hpp"
#include "zqsync/thresholds.hpp"

namespace zqsync {

namespace {

constexpr int kPerLevel = 5;

Graph build_tree(TreeKind kind, int k, int depth) {
  if (kind == TreeKind::ary) return gen_ary_tree(k - 1, depth);
  return gen_tree(k, depth);
}

std::int64_t level_size(TreeKind kind, int k, int l) {
  const int root_children = kind == TreeKind::ary ? k - 1 : k;
  return tree_size(root_children, k - 1, l);
}

void validate(int k, int q, double p, double eps, int l_max, const RecursionOptions& opts) {
  if (k < 2) throw std::invalid_argument("tree recursion: k must be >= 2");
  if (q < 2 || q > kAlphabetCap) throw std::invalid_argument("tree recursion: bad q");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("tree recursion: p must lie in [0, 1]");
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("tree recursion: eps must lie in [0, 1]");
  if (l_max < 0) throw std::invalid_argument("tree recursion: negative depth");
  if (opts.trials < 1) throw std::invalid_argument("tree recursion: trials must be >= 1");
  if (opts.root_label >= q) throw std::invalid_argument("tree recursion: bad root label");
}

}  // namespace

RecursionTrace simulate_root_statistic(TreeKind kind, int k, int q, double p, double eps, int l_max,
                                       const RecursionOptions& opts) {
  validate(k, q, p, eps, l_max, opts);
  const Graph tree = build_tree(kind, k, l_max);
  const Kernel kernel = kernel_zq(q, p);
  std::vector<int> prefix(l_max + 1);
  for (int l = 0; l <= l_max; ++l) prefix[l] = static_cast<int>(level_size(kind, k, l));
  const int root_children = kind == TreeKind::ary ? k - 1 : k;

  RecursionTrace trace;
  trace.kind = kind;
  trace.k = k;
  trace.q = q;
  trace.p = p;
  trace.eps = eps;
  trace.kappa = (1.0 - p) * (1.0 - p) * root_children;

  std::vector<double> eps_vec(tree.n, eps);
  if (!opts.reveal_root) eps_vec[0] = 0.0;
  const double inv_q = 1.0 / q;

  MCOptions mc{opts.trials, opts.seed, hash_name("simulate_root_statistic"), opts.jobs};
  const int outputs = kPerLevel * (l_max + 1);
  auto trial = [&](std::int64_t, std::uint64_t seed, double* out) {
    RootMessagePass pass;
    const Instance inst = sample_instance(tree, kernel, eps_vec, seed, opts.root_label);
    const int root = inst.theta0[0];
    for (int l = 0; l <= l_max; ++l) {
      const std::vector<double>& mu = pass.run(tree, kernel, inst, prefix[l]);
      double tv = 0.0, l2 = 0.0, sq = 0.0;
      for (int x = 0; x < q; ++x) {
        const double d = mu[x] - inv_q;
        tv += std::abs(d);
        l2 += d * d;
        sq += mu[x] * mu[x];
      }
      tv *= 0.5;
      double* rec = out + kPerLevel * l;
      rec[0] = mu[root] - inv_q;
      rec[1] = tv * tv;
      rec[2] = l2;
      rec[3] = l2 - rec[0];
      rec[4] = 0.0;
      if (l >= 1) {
        // Averaged over theta_root under mu, so the mean is unchanged.
        double linear = 0.0;
        for (const auto& inc : tree.adjacency[0]) {
          const int u = inc.neighbor;
          const double* mu_u = pass.subtree_marginal(u);
          const int y = inst.y[inc.edge];
          const bool tail = tree.edges[inc.edge].first == 0;
          for (int x = 0; x < q; ++x) {
            const int partner = tail ? ((x - y) % q + q) % q : (x + y) % q;
            linear += mu[x] * (mu_u[partner] - inv_q);
          }
        }
        out[kPerLevel * (l - 1) + 4] = (sq - inv_q) - (1.0 - p) * linear;
      }
    }
  };
  const std::vector<MCEstimate> est = mc_average(trial, outputs, mc);
  trace.levels.resize(l_max + 1);
  for (int l = 0; l <= l_max; ++l) {
    LevelRecord& rec = trace.levels[l];
    rec.l = l;
    rec.z_hat = est[kPerLevel * l];
    rec.dtv2 = est[kPerLevel * l + 1];
    rec.l2sq = est[kPerLevel * l + 2];
    rec.l2_minus_z = est[kPerLevel * l + 3];
    rec.has_residual = l < l_max && !opts.reveal_root;
    if (rec.has_residual) rec.residual = est[kPerLevel * l + 4];
  }
  return trace;
}

ResidualFit recursion_residual(const RecursionTrace& trace) {
  int count = 0;
  for (const auto& rec : trace.levels) count += rec.has_residual ? 1 : 0;
  if (count < 1) throw std::invalid_argument("recursion_residual: trace needs at least two levels");
  ResidualFit fit;
  for (const auto& rec : trace.levels) {
    if (!rec.has_residual) continue;
    ResidualPoint pt;
    pt.l = rec.l;
    pt.r = std::abs(rec.residual.mean);
    pt.se = rec.residual.std_error;
    pt.envelope = rec.z_hat.mean * rec.z_hat.mean + trace.eps * trace.eps;
    if (pt.envelope > 0.0) fit.c_fit = std::max(fit.c_fit, pt.r / pt.envelope);
    fit.points.push_back(pt);
  }
  return fit;
}

double stability_envelope(double c_fit, double kappa, int q) {
  if (kappa >= 1.0) return std::numeric_limits<double>::infinity();
  return (c_fit + kappa * (q - 1) / static_cast<double>(q)) / (4.0 * (1.0 - kappa)) + 1.0;
}

MCEstimate unconditional_dtv2(const LevelRecord& rec, double eps, int q) {
  const double a = (q - 1) / static_cast<double>(q);
  MCEstimate out = rec.dtv2;
  out.mean = eps * a * a + (1.0 - eps) * rec.dtv2.mean;
  out.std_error = (1.0 - eps) * rec.dtv2.std_error;
  return out;
}

PhaseReport ks_phase_probe(int k, int q, double p_below, double p_above,
                           const std::vector<double>& eps_list, int l_max,
                           const RecursionOptions& opts) {
  if (eps_list.empty()) throw std::invalid_argument("ks_phase_probe: empty eps list");
  if (!(kesten_stigum(k, p_below) < 1.0 && kesten_stigum(k, p_above) > 1.0))
    throw std::invalid_argument("ks_phase_probe: p_below and p_above must straddle the threshold");
  PhaseReport report;
  auto probe = [&](double p, std::vector<PhasePoint>& dest) {
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
      RecursionOptions o = opts;
      o.seed = derive_seed(opts.seed, hash_name("ks_phase_probe"), i);
      const RecursionTrace trace = simulate_root_statistic(TreeKind::ary, k, q, p, eps_list[i], l_max, o);
      PhasePoint pt;
      pt.p = p;
      pt.kappa = trace.kappa;
      pt.eps = eps_list[i];
      pt.plateau = unconditional_dtv2(trace.levels.back(), eps_list[i], q);
      pt.ratio = pt.eps > 0.0 ? pt.plateau.mean / pt.eps : std::numeric_limits<double>::infinity();
      dest.push_back(pt);
    }
  };
  probe(p_below, report.below);
  probe(p_above, report.above);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& pt : report.below) {
    lo = std::min(lo, pt.ratio);
    hi = std::max(hi, pt.ratio);
  }
  report.below_ratio_spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return report;
}

ReweightingReport reweighting_check(int k, int q, double p, double eps, int l,
                                    const RecursionOptions& opts) {
  validate(k, q, p, eps, l, opts);
  const Graph tree = build_tree(TreeKind::ary, k, l);
  const Kernel kernel = kernel_zq(q, p);
  std::vector<double> eps_vec(tree.n, eps);
  if (!opts.reveal_root) eps_vec[0] = 0.0;
  const int num_psi = 2 * q + 1;
  auto psi_value = [q](const std::vector<double>& mu, int psi) {
    if (psi < q) return mu[psi];
    if (psi < 2 * q) return mu[psi - q] * mu[psi - q];
    return 1.0;
  };

  MCOptions mc{opts.trials, opts.seed, hash_name("reweighting_check/free"), opts.jobs};
  const std::vector<MCEstimate> weighted = mc_average(
      [&](std::int64_t, std::uint64_t seed, double* out) {
        RootMessagePass pass;
        const Instance inst = sample_instance(tree, kernel, eps_vec, seed, -1);
        const std::vector<double>& mu = pass.run(tree, kernel, inst, tree.n);
        for (int x = 0; x < q; ++x)
          for (int psi = 0; psi < num_psi; ++psi) out[x * num_psi + psi] = psi_value(mu, psi) * q * mu[x];
      },
      q * num_psi, mc);

  ReweightingReport report;
  for (int x = 0; x < q; ++x) {
    MCOptions cond{opts.trials, opts.seed, derive_seed(hash_name("reweighting_check/fixed"), 0, x), opts.jobs};
    const std::vector<MCEstimate> conditioned = mc_average(
        [&](std::int64_t, std::uint64_t seed, double* out) {
          RootMessagePass pass;
          const Instance inst = sample_instance(tree, kernel, eps_vec, seed, x);
          const std::vector<double>& mu = pass.run(tree, kernel, inst, tree.n);
          for (int psi = 0; psi < num_psi; ++psi) out[psi] = psi_value(mu, psi);
        },
        num_psi, cond);
    for (int psi = 0; psi < num_psi; ++psi) {
      ReweightingEntry e;
      e.x = x;
      e.psi = psi;
      e.weighted = weighted[x * num_psi + psi];
      e.conditioned = conditioned[psi];
      e.discrepancy = std::abs(e.weighted.mean - e.conditioned.mean);
      e.combined_se = std::hypot(e.weighted.std_error, e.conditioned.std_error);
      report.max_discrepancy = std::max(report.max_discrepancy, e.discrepancy);
      if (e.combined_se > 0.0)
        report.max_z = std::max(report.max_z, e.discrepancy / e.combined_se);
      else if (e.discrepancy > 1e-12)
        report.max_z = std::numeric_limits<double>::infinity();
      report.entries.push_back(e);
    }
  }
  return report;
}

}  // namespace zqsync
