#include "zqsync/thresholds.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "zqsync/information.hpp"
#include "zqsync/rng.hpp"

namespace zqsync {

double kesten_stigum(int k, double p) {
  if (k < 2) throw std::invalid_argument("kesten_stigum: k must be >= 2");
  return (1.0 - p) * (1.0 - p) * (k - 1);
}

double kesten_stigum_root(int k, double p) {
  if (k < 2) throw std::invalid_argument("kesten_stigum_root: k must be >= 2");
  return (1.0 - p) * (1.0 - p) * k;
}

double k_star(double p, int q) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("k_star: p must lie in (0, 1)");
  if (q < 2) throw std::invalid_argument("k_star: q must be >= 2");
  const double qd = q;
  const double denom = (1.0 - p + p / qd) * std::log(p + qd * (1.0 - p)) + (1.0 - 1.0 / qd) * p * std::log(p);
  return 2.0 * std::log(qd) / denom;
}

WeakRecovery weak_recovery_condition(const Kernel& kernel, int k) {
  WeakRecovery w;
  w.lhs = 0.5 * k * channel_mutual_information(kernel);
  w.rhs = std::log(static_cast<double>(kernel.q()));
  w.satisfied = w.lhs >= w.rhs;
  w.margin = w.lhs - w.rhs;
  return w;
}

OverlapDist pair_average_marginal(const JointEdgeDist& omega) {
  const int q = omega.q;
  OverlapDist out(q, std::vector<double>(q, 0.0));
  for (int x1 = 0; x1 < q; ++x1)
    for (int xt1 = 0; xt1 < q; ++xt1)
      for (int x2 = 0; x2 < q; ++x2)
        for (int xt2 = 0; xt2 < q; ++xt2)
          for (int y = 0; y < omega.y_size; ++y) {
            const double v = omega.p[omega.index(x1, xt1, x2, xt2, y)];
            out[x1][xt1] += 0.5 * v;
            out[x2][xt2] += 0.5 * v;
          }
  return out;
}

std::vector<double> edge_marginal(const JointEdgeDist& omega, bool first) {
  const int q = omega.q;
  const int ys = omega.y_size;
  std::vector<double> out(static_cast<std::size_t>(q) * q * ys, 0.0);
  for (int x1 = 0; x1 < q; ++x1)
    for (int xt1 = 0; xt1 < q; ++xt1)
      for (int x2 = 0; x2 < q; ++x2)
        for (int xt2 = 0; xt2 < q; ++xt2)
          for (int y = 0; y < ys; ++y) {
            const double v = omega.p[omega.index(x1, xt1, x2, xt2, y)];
            const std::size_t idx = first ? (static_cast<std::size_t>(x1) * q + x2) * ys + y
                                          : (static_cast<std::size_t>(xt1) * q + xt2) * ys + y;
            out[idx] += v;
          }
  return out;
}

namespace {

double table_entropy(const OverlapDist& t) {
  double h = 0.0;
  for (const auto& row : t)
    for (double v : row)
      if (v > 0.0) h -= v * std::log(v);
  return h;
}

std::vector<double> nu_e(const Kernel& kernel) {
  const int q = kernel.q();
  std::vector<double> out(static_cast<std::size_t>(q) * q * kernel.y_size());
  for (int x1 = 0; x1 < q; ++x1)
    for (int x2 = 0; x2 < q; ++x2)
      for (int y = 0; y < kernel.y_size(); ++y)
        out[(static_cast<std::size_t>(x1) * q + x2) * kernel.y_size() + y] = kernel(y, x1, x2) / (q * q);
  return out;
}

std::vector<double> y_law(const Kernel& kernel) {
  const int q = kernel.q();
  std::vector<double> py(kernel.y_size(), 0.0);
  for (int x1 = 0; x1 < q; ++x1)
    for (int x2 = 0; x2 < q; ++x2)
      for (int y = 0; y < kernel.y_size(); ++y) py[y] += kernel(y, x1, x2) / (q * q);
  return py;
}

void check_shape(const JointEdgeDist& omega, const Kernel& kernel) {
  if (omega.q != kernel.q() || omega.y_size != kernel.y_size() ||
      omega.p.size() != static_cast<std::size_t>(omega.q) * omega.q * omega.q * omega.q * omega.y_size)
    throw std::invalid_argument("JointEdgeDist: shape does not match the kernel");
}

}  // namespace

double s_functional(const JointEdgeDist& omega, int k, const Kernel& kernel) {
  check_shape(omega, kernel);
  const double h_omega = entropy(omega.p);
  const double h_pair = table_entropy(pair_average_marginal(omega));
  const double h_e = entropy(nu_e(kernel));
  const double h_v = std::log(static_cast<double>(kernel.q()));
  return 0.5 * k * h_omega - (k - 1) * h_pair - 0.5 * k * h_e + (k - 1) * h_v;
}

JointEdgeDist diagonal_coupling(const Kernel& kernel) {
  JointEdgeDist out;
  out.q = kernel.q();
  out.y_size = kernel.y_size();
  const int q = out.q;
  out.p.assign(static_cast<std::size_t>(q) * q * q * q * out.y_size, 0.0);
  const auto e = nu_e(kernel);
  for (int x1 = 0; x1 < q; ++x1)
    for (int x2 = 0; x2 < q; ++x2)
      for (int y = 0; y < out.y_size; ++y)
        out.p[out.index(x1, x1, x2, x2, y)] = e[(static_cast<std::size_t>(x1) * q + x2) * out.y_size + y];
  return out;
}

JointEdgeDist conditional_independent_coupling(const Kernel& kernel) {
  JointEdgeDist out;
  out.q = kernel.q();
  out.y_size = kernel.y_size();
  const int q = out.q;
  const int ys = out.y_size;
  out.p.assign(static_cast<std::size_t>(q) * q * q * q * ys, 0.0);
  const auto e = nu_e(kernel);
  const auto py = y_law(kernel);
  for (int x1 = 0; x1 < q; ++x1)
    for (int xt1 = 0; xt1 < q; ++xt1)
      for (int x2 = 0; x2 < q; ++x2)
        for (int xt2 = 0; xt2 < q; ++xt2)
          for (int y = 0; y < ys; ++y) {
            if (py[y] <= 0.0) continue;
            out.p[out.index(x1, xt1, x2, xt2, y)] = e[(static_cast<std::size_t>(x1) * q + x2) * ys + y] *
                                                    e[(static_cast<std::size_t>(xt1) * q + xt2) * ys + y] / py[y];
          }
  return out;
}

OverlapDist uniform_product(int q) {
  return OverlapDist(q, std::vector<double>(q, 1.0 / (static_cast<double>(q) * q)));
}

double s_star_upper_bound(const OverlapDist& omega, int k, const Kernel& kernel) {
  const double h_e = entropy(nu_e(kernel));
  const double h_y = entropy(y_law(kernel));
  const double log_q = std::log(static_cast<double>(kernel.q()));
  return 0.5 * k * (h_e - h_y) - (k - 1) * table_entropy(omega) + (k - 1) * log_q;
}

namespace {

// Maximum-entropy problem: maximize H(P) over cells subject to E_P[a] = b,
// where each cell carries a sparse feature vector.
struct MaxEntProblem {
  int num_features = 0;
  std::vector<std::vector<std::pair<int, double>>> cell_features;
  std::vector<std::size_t> cell_index;  // position in the JointEdgeDist table
  Eigen::VectorXd target;
};

struct DualSolution {
  bool converged = false;
  double residual = std::numeric_limits<double>::infinity();
  std::vector<double> cells;
};

DualSolution solve_dual(const MaxEntProblem& prob, Eigen::VectorXd lambda, double tol, int max_iter) {
  const int m = prob.num_features;
  const std::size_t nc = prob.cell_features.size();
  std::vector<double> score(nc), w(nc);
  auto evaluate = [&](const Eigen::VectorXd& lam, double& logz) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < nc; ++c) {
      double s = 0.0;
      for (auto [j, a] : prob.cell_features[c]) s += lam[j] * a;
      score[c] = s;
      mx = std::max(mx, s);
    }
    double z = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      w[c] = std::exp(score[c] - mx);
      z += w[c];
    }
    for (std::size_t c = 0; c < nc; ++c) w[c] /= z;
    logz = mx + std::log(z);
    return logz - lam.dot(prob.target);
  };
  DualSolution sol;
  double logz = 0.0;
  double f = evaluate(lambda, logz);
  Eigen::VectorXd grad(m);
  Eigen::MatrixXd hess(m, m);
  for (int it = 0; it < max_iter; ++it) {
    grad = -prob.target;
    hess.setZero();
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& feats = prob.cell_features[c];
      for (auto [j, a] : feats) grad[j] += w[c] * a;
      for (auto [i, ai] : feats)
        for (auto [j, aj] : feats) hess(i, j) += w[c] * ai * aj;
    }
    Eigen::VectorXd mean = grad + prob.target;
    hess -= mean * mean.transpose();
    sol.residual = grad.cwiseAbs().maxCoeff();
    if (sol.residual <= tol) {
      sol.converged = true;
      break;
    }
    const double ridge = 1e-12 + 1e-9 * hess.diagonal().cwiseAbs().maxCoeff();
    Eigen::MatrixXd damped = hess;
    damped.diagonal().array() += ridge;
    Eigen::VectorXd step = -damped.ldlt().solve(grad);
    if (!step.allFinite()) step = -grad;
    double t = 1.0;
    const double slope = grad.dot(step);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd trial = lambda + t * step;
      double trial_logz = 0.0;
      const double ft = evaluate(trial, trial_logz);
      if (std::isfinite(ft) && ft <= f + 1e-4 * t * slope) {
        lambda = trial;
        f = ft;
        logz = trial_logz;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      evaluate(lambda, logz);
      break;
    }
  }
  sol.cells = w;
  // Final residual from the returned cells.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
  for (std::size_t c = 0; c < nc; ++c)
    for (auto [j, a] : prob.cell_features[c]) mean[j] += w[c] * a;
  sol.residual = (mean - prob.target).cwiseAbs().maxCoeff();
  sol.converged = sol.residual <= tol;
  return sol;
}

}  // namespace

SStarResult s_star(const OverlapDist& omega, int k, const Kernel& kernel, const SStarOptions& opts) {
  const int q = kernel.q();
  const int ys = kernel.y_size();
  if (static_cast<int>(omega.size()) != q) throw std::invalid_argument("s_star: omega has the wrong size");
  double total = 0.0;
  for (const auto& row : omega) {
    if (static_cast<int>(row.size()) != q) throw std::invalid_argument("s_star: omega has the wrong size");
    for (double v : row) {
      if (v < 0.0) throw std::invalid_argument("s_star: omega has a negative entry");
      total += v;
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("s_star: omega does not sum to one");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("s_star: tol must be positive");

  const auto e = nu_e(kernel);
  // Features: pair average (q^2), first edge marginal (q^2 ys), second edge marginal (q^2 ys).
  // Features with zero target force their cells to zero and are dropped.
  const int pair_base = 0;
  const int e1_base = q * q;
  const int e2_base = e1_base + q * q * ys;
  const int raw_features = e2_base + q * q * ys;
  std::vector<double> raw_target(raw_features);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) raw_target[pair_base + a * q + b] = omega[a][b];
  for (std::size_t i = 0; i < e.size(); ++i) {
    raw_target[e1_base + i] = e[i];
    raw_target[e2_base + i] = e[i];
  }
  std::vector<int> remap(raw_features, -1);
  MaxEntProblem prob;
  std::vector<double> target;
  for (int j = 0; j < raw_features; ++j) {
    if (raw_target[j] > 0.0) {
      remap[j] = prob.num_features++;
      target.push_back(raw_target[j]);
    }
  }
  prob.target = Eigen::Map<Eigen::VectorXd>(target.data(), static_cast<Eigen::Index>(target.size()));

  JointEdgeDist shape;
  shape.q = q;
  shape.y_size = ys;
  shape.p.assign(static_cast<std::size_t>(q) * q * q * q * ys, 0.0);
  for (int x1 = 0; x1 < q; ++x1)
    for (int xt1 = 0; xt1 < q; ++xt1)
      for (int x2 = 0; x2 < q; ++x2)
        for (int xt2 = 0; xt2 < q; ++xt2)
          for (int y = 0; y < ys; ++y) {
            const int f_p1 = remap[pair_base + x1 * q + xt1];
            const int f_p2 = remap[pair_base + x2 * q + xt2];
            const int f_e1 = remap[e1_base + (x1 * q + x2) * ys + y];
            const int f_e2 = remap[e2_base + (xt1 * q + xt2) * ys + y];
            if (f_p1 < 0 || f_p2 < 0 || f_e1 < 0 || f_e2 < 0) continue;
            std::vector<std::pair<int, double>> feats;
            if (f_p1 == f_p2) {
              feats.emplace_back(f_p1, 1.0);
            } else {
              feats.emplace_back(f_p1, 0.5);
              feats.emplace_back(f_p2, 0.5);
            }
            feats.emplace_back(f_e1, 1.0);
            feats.emplace_back(f_e2, 1.0);
            prob.cell_features.push_back(std::move(feats));
            prob.cell_index.push_back(shape.index(x1, xt1, x2, xt2, y));
          }
  if (prob.cell_features.empty()) throw std::runtime_error("s_star: no feasible point (empty support)");

  const int restarts = std::max(1, opts.restarts);
  std::vector<DualSolution> sols(restarts);
  parallel_for(restarts, opts.jobs, [&](std::int64_t r) {
    Eigen::VectorXd start = Eigen::VectorXd::Zero(prob.num_features);
    if (r > 0) {
      SplitMix64 rng(derive_seed(opts.seed, hash_name("s_star"), static_cast<std::uint64_t>(r)));
      for (int j = 0; j < prob.num_features; ++j) start[j] = 2.0 * rng.uniform() - 1.0;
    }
    sols[r] = solve_dual(prob, start, std::min(opts.tol, 1e-10), opts.max_iterations);
  });

  SStarResult res;
  res.upper_bound = s_star_upper_bound(omega, k, kernel);
  res.restarts_used = restarts;
  int best = -1;
  for (int r = 0; r < restarts; ++r) {
    JointEdgeDist cand = shape;
    for (std::size_t c = 0; c < sols[r].cells.size(); ++c) cand.p[prob.cell_index[c]] = sols[r].cells[c];
    const double value = s_functional(cand, k, kernel);
    res.restart_values.push_back(value);
    if (sols[r].residual > opts.tol) continue;
    if (best < 0 || value > res.value) {
      best = r;
      res.value = value;
      res.argmax = std::move(cand);
      res.feasibility_residual = sols[r].residual;
    }
  }
  if (best < 0) {
    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& s : sols) smallest = std::min(smallest, s.residual);
    throw std::runtime_error("s_star: no feasible point found (smallest constraint residual " +
                             std::to_string(smallest) + ")");
  }
  return res;
}

}  // namespace zqsync
