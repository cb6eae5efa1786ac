#include "zqsync/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "zqsync/rng.hpp"

namespace zqsync {

double risk(const EstimateMatrix& est, const std::vector<int>& theta0, const LabelFunction& f) {
  const int n = static_cast<int>(theta0.size());
  if (est.n != n) throw std::invalid_argument("risk: dimension mismatch");
  if (n == 0) return 0.0;
  std::vector<double> fv(n);
  for (int u = 0; u < n; ++u) fv[u] = f(theta0[u]);
  const double n2 = static_cast<double>(n) * n;
  if (est.rank_one) {
    double ff = 0.0, fa = 0.0, aa = 0.0;
    for (int u = 0; u < n; ++u) {
      ff += fv[u] * fv[u];
      fa += fv[u] * est.factor[u];
      aa += est.factor[u] * est.factor[u];
    }
    return std::max(0.0, ff * ff - 2.0 * fa * fa + aa * aa) / n2;
  }
  double s = 0.0;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      const double d = fv[u] * fv[v] - est.dense[static_cast<std::size_t>(u) * n + v];
      s += d * d;
    }
  return s / n2;
}

double overlap(const std::vector<int>& theta_hat, const std::vector<int>& theta0, int q) {
  if (theta_hat.size() != theta0.size()) throw std::invalid_argument("overlap: length mismatch");
  if (q > kPermutationCap)
    throw std::invalid_argument("overlap: q exceeds the permutation cap; assignment relaxations are not supported");
  if (theta0.empty()) return 0.0;
  std::vector<std::vector<int>> conf(q, std::vector<int>(q, 0));
  for (std::size_t u = 0; u < theta0.size(); ++u) ++conf[theta0[u]][theta_hat[u]];
  std::vector<int> sigma(q);
  std::iota(sigma.begin(), sigma.end(), 0);
  int best = 0;
  do {
    int s = 0;
    for (int x = 0; x < q; ++x) s += conf[x][sigma[x]];
    best = std::max(best, s);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return static_cast<double>(best) / static_cast<double>(theta0.size());
}

OverlapDist joint_vertex_empirical(const std::vector<int>& theta0, const std::vector<int>& theta_hat,
                                   int q) {
  if (theta_hat.size() != theta0.size()) throw std::invalid_argument("joint_vertex_empirical: length mismatch");
  OverlapDist w(q, std::vector<double>(q, 0.0));
  if (theta0.empty()) return w;
  const double unit = 1.0 / static_cast<double>(theta0.size());
  for (std::size_t u = 0; u < theta0.size(); ++u) w[theta0[u]][theta_hat[u]] += unit;
  return w;
}

double overlap_lower_bound(const OverlapDist& omega) {
  double s = 0.0;
  for (const auto& row : omega)
    for (double v : row) s += v * v;
  return static_cast<double>(omega.size()) * s;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& r) {
  if (p.size() != r.size()) throw std::invalid_argument("tv_distance: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - r[i]);
  return 0.5 * s;
}

double l2_distance(const std::vector<double>& p, const std::vector<double>& r) {
  if (p.size() != r.size()) throw std::invalid_argument("l2_distance: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - r[i]) * (p[i] - r[i]);
  return std::sqrt(s);
}

std::uint64_t trial_seed(const MCOptions& opts, std::int64_t index) {
  return derive_seed(opts.seed_base, opts.stream, static_cast<std::uint64_t>(index));
}

void parallel_for(std::int64_t count, int jobs, const std::function<void(std::int64_t)>& body) {
  if (count <= 0) return;
  const int workers = static_cast<int>(std::min<std::int64_t>(std::max(jobs, 1), count));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::atomic<bool> stop{false};
  auto work = [&]() {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<MCEstimate> mc_average(const TrialFunction& fn, int outputs, const MCOptions& opts) {
  if (opts.trials < 1) throw std::invalid_argument("mc_average: trials must be >= 1");
  if (outputs < 1) throw std::invalid_argument("mc_average: outputs must be >= 1");
  constexpr std::int64_t kBlock = 4096;
  std::vector<double> buffer;
  std::vector<double> mean(outputs, 0.0), m2(outputs, 0.0);
  std::int64_t done = 0;
  for (std::int64_t start = 0; start < opts.trials; start += kBlock) {
    const std::int64_t count = std::min(kBlock, opts.trials - start);
    buffer.assign(static_cast<std::size_t>(count) * outputs, 0.0);
    std::vector<std::int64_t> failed(count, 0);
    std::vector<std::string> messages(count);
    parallel_for(count, opts.jobs, [&](std::int64_t i) {
      const std::int64_t index = start + i;
      try {
        fn(index, trial_seed(opts, index), &buffer[static_cast<std::size_t>(i) * outputs]);
      } catch (const std::exception& ex) {
        failed[i] = 1;
        messages[i] = ex.what();
      }
    });
    for (std::int64_t i = 0; i < count; ++i) {
      if (failed[i]) {
        std::ostringstream msg;
        msg << "trial " << (start + i) << " (seed " << trial_seed(opts, start + i)
            << ") failed: " << messages[i];
        throw std::runtime_error(msg.str());
      }
    }
    for (std::int64_t i = 0; i < count; ++i) {
      ++done;
      for (int k = 0; k < outputs; ++k) {
        const double x = buffer[static_cast<std::size_t>(i) * outputs + k];
        const double delta = x - mean[k];
        mean[k] += delta / static_cast<double>(done);
        m2[k] += delta * (x - mean[k]);
      }
    }
  }
  std::vector<MCEstimate> out(outputs);
  for (int k = 0; k < outputs; ++k) {
    out[k].mean = mean[k];
    out[k].trials = done;
    out[k].seed_base = opts.seed_base;
    out[k].std_error = done >= 2 ? std::sqrt(m2[k] / static_cast<double>(done - 1) / static_cast<double>(done))
                                 : std::numeric_limits<double>::infinity();
  }
  return out;
}

MCEstimate mc_average(const std::function<double(std::uint64_t seed)>& fn, const MCOptions& opts) {
  return mc_average([&](std::int64_t, std::uint64_t seed, double* out) { *out = fn(seed); }, 1, opts)[0];
}

}  // namespace zqsync
