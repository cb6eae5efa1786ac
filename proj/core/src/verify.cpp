#include "zqsync/verify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <ostream>
#include <sstream>

#include "zqsync/csv.hpp"
#include "zqsync/estimators.hpp"
#include "zqsync/graphs.hpp"
#include "zqsync/inference.hpp"
#include "zqsync/information.hpp"
#include "zqsync/metrics.hpp"
#include "zqsync/model.hpp"
#include "zqsync/rng.hpp"
#include "zqsync/thresholds.hpp"
#include "zqsync/tree_recursion.hpp"

namespace zqsync {

namespace {

double max_abs_diff(const MarginalTable& a, const MarginalTable& b) {
  double worst = 0.0;
  for (std::size_t u = 0; u < a.size(); ++u)
    for (std::size_t x = 0; x < a[u].size(); ++x) worst = std::max(worst, std::abs(a[u][x] - b[u][x]));
  return worst;
}

CheckResult tree_exactness(bool full, std::uint64_t seed) {
  const int per_setting = full ? 50 : 5;
  double worst = 0.0;
  int count = 0;
  for (int k : {3, 4})
    for (int q : {2, 3})
      for (double p : {0.1, 0.5, 0.9})
        for (double eps : {0.0, 0.3, 1.0}) {
          const int depth = (k == 4 && q == 3) ? 1 : 2;
          const Graph tree = gen_tree(k, depth);
          const Kernel kernel = kernel_zq(q, p);
          for (int t = 0; t < per_setting; ++t) {
            const Instance inst = sample_instance(tree, kernel, eps, derive_seed(seed, hash_name("tree"), count++));
            const MarginalTable exact = exact_posterior_marginals(tree, kernel, inst);
            worst = std::max(worst, max_abs_diff(exact, bp_tree_marginals(tree, kernel, inst, BpPath::zq)));
            worst = std::max(worst, max_abs_diff(exact, bp_tree_marginals(tree, kernel, inst, BpPath::generic)));
          }
        }
  std::ostringstream d;
  d << count << " instances, max |bp - exact| = " << worst;
  return {"bp_tree_exactness", worst <= 1e-10, d.str()};
}

CheckResult zero_risk(std::uint64_t seed) {
  const Graph g = gen_cycle(10);
  const Kernel kernel = kernel_zq(2, 0.3);
  const LabelFunction f = default_label_function(2);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Instance inst = sample_instance(g, kernel, 0.2, derive_seed(seed, hash_name("zero"), t));
    worst = std::max(worst, std::abs(risk(EstimateMatrix::zero(g.n), inst.theta0, f) - 1.0));
  }
  std::ostringstream d;
  d << "max |risk(0) - 1| = " << worst;
  return {"zero_estimator_risk", worst <= 1e-12, d.str()};
}

CheckResult threshold_identities() {
  double worst = 0.0;
  for (int q : {2, 3, 5})
    for (double p = 0.05; p < 0.96; p += 0.05) {
      const double info = channel_mutual_information(kernel_zq(q, p));
      worst = std::max(worst, std::abs(k_star(p, q) - 2.0 * std::log(q) / info) / k_star(p, q));
    }
  const double kappa = kesten_stigum(3, 0.4);
  const bool kappa_ok = std::abs(kappa - 0.72) < 1e-12 && std::abs(kesten_stigum(3, 0.1) - 1.62) < 1e-12;
  std::ostringstream d;
  d << "max rel |k_star - 2 log q / I| = " << worst << ", kappa(3, 0.4) = " << kappa;
  return {"threshold_identities", worst <= 1e-9 && kappa_ok, d.str()};
}

CheckResult noiseless_s_star(std::uint64_t seed) {
  double worst = 0.0;
  for (int q : {2, 3}) {
    SStarOptions opts;
    opts.seed = seed;
    const SStarResult r = s_star(uniform_product(q), 3, kernel_zq(q, 1.0), opts);
    worst = std::max(worst, std::abs(r.value - std::log(q)));
  }
  std::ostringstream d;
  d << "max |S_* - log q| at p = 1: " << worst;
  return {"s_star_noiseless", worst <= 1e-6, d.str()};
}

CheckResult information_paths() {
  const Graph g = gen_cycle(5);
  const Kernel kernel = kernel_zq(3, 0.4);
  const std::vector<double> eps(g.n, 0.3);
  const std::vector<std::vector<int>> groups = {{0}, {0, 2}, {1, 3, 4}};
  InformationOptions direct;
  direct.force_direct = true;
  const auto a = conditional_entropies(g, kernel, eps, groups);
  const auto b = conditional_entropies(g, kernel, eps, groups, direct);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  std::ostringstream d;
  d << "max |reduced - direct| conditional entropy = " << worst;
  return {"information_paths", worst <= 1e-10, d.str()};
}

CheckResult recursion_symmetry(std::uint64_t seed) {
  RecursionOptions opts;
  opts.trials = 200;
  opts.seed = seed;
  const RecursionTrace tr = simulate_root_statistic(TreeKind::ary, 3, 2, 0.4, 0.0, 4, opts);
  double worst = 0.0;
  for (const auto& rec : tr.levels) worst = std::max({worst, std::abs(rec.z_hat.mean), rec.dtv2.mean});
  RecursionOptions opts2 = opts;
  const RecursionTrace tr2 = simulate_root_statistic(TreeKind::ary, 3, 2, 0.4, 0.1, 4, opts2);
  const bool z0 = tr2.levels[0].z_hat.mean == 0.0 && tr2.levels[0].z_hat.std_error == 0.0;
  std::ostringstream d;
  d << "eps = 0 max |z|, dtv2 = " << worst << "; z_0 exact zero: " << (z0 ? "yes" : "no");
  return {"recursion_symmetry", worst == 0.0 && z0, d.str()};
}

CheckResult determinism(int jobs, std::uint64_t seed) {
  const Graph g = gen_torus(2, 3);
  const Kernel kernel = kernel_zq(2, 0.3);
  auto run_with = [&](int j) {
    MCOptions mc{64, seed, hash_name("determinism"), j};
    return mc_average(
        [&](std::uint64_t s) {
          const Instance inst = sample_instance(g, kernel, 0.2, s);
          const MarginalTable m = local_marginals(g, 1, kernel, inst);
          double v = 0.0;
          for (const auto& row : m) v += row[0] * row[0];
          return v;
        },
        mc);
  };
  const MCEstimate a = run_with(1);
  const MCEstimate b = run_with(std::max(2, jobs));
  const bool same = format_real(a.mean) == format_real(b.mean) && format_real(a.std_error) == format_real(b.std_error);
  std::ostringstream d;
  d << "jobs 1 vs " << std::max(2, jobs) << ": " << format_real(a.mean) << " / " << format_real(b.mean);
  return {"determinism", same, d.str()};
}

CheckResult overlap_invariance(std::uint64_t seed) {
  SplitMix64 rng(seed);
  bool ok = true;
  for (int t = 0; t < 50 && ok; ++t) {
    std::vector<int> a(20), b(20);
    for (int u = 0; u < 20; ++u) {
      a[u] = static_cast<int>(rng.uniform_int(3));
      b[u] = static_cast<int>(rng.uniform_int(3));
    }
    std::vector<int> relabeled(b);
    for (int& x : relabeled) x = (x + 1) % 3;
    ok = overlap(b, a, 3) == overlap(relabeled, a, 3) && overlap(a, a, 3) == 1.0;
  }
  return {"overlap_invariance", ok, ok ? "overlap is invariant under relabeling" : "relabeling changed overlap"};
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(bool full, int jobs, std::uint64_t seed, std::ostream& log) {
  const std::vector<std::pair<const char*, std::function<CheckResult()>>> checks = {
      {"bp_tree_exactness", [&] { return tree_exactness(full, seed); }},
      {"zero_estimator_risk", [&] { return zero_risk(seed); }},
      {"threshold_identities", [&] { return threshold_identities(); }},
      {"s_star_noiseless", [&] { return noiseless_s_star(seed); }},
      {"information_paths", [&] { return information_paths(); }},
      {"recursion_symmetry", [&] { return recursion_symmetry(seed); }},
      {"determinism", [&] { return determinism(jobs, seed); }},
      {"overlap_invariance", [&] { return overlap_invariance(seed); }},
  };
  std::vector<CheckResult> results;
  for (const auto& [name, check] : checks) {
    CheckResult r;
    try {
      r = check();
    } catch (const std::exception& ex) {
      r.pass = false;
      r.detail = std::string("error: ") + ex.what();
    }
    r.name = name;
    log << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace zqsync
