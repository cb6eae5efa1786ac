#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "zqsync/graphs.hpp"
#include "zqsync/model.hpp"

namespace zqsync {

inline constexpr std::int64_t kDefaultEnumerationCap = std::int64_t{1} << 24;

class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& what, double required, double cap);
  double required() const { return required_; }
  double cap() const { return cap_; }

 private:
  double required_;
  double cap_;
};

class ZeroLikelihood : public std::runtime_error {
 public:
  ZeroLikelihood() : std::runtime_error("observation has zero likelihood") {}
};

/// q^count as a double (exact for the sizes used here).
double power_count(int q, int count);

/// Loopless reflected mixed-radix Gray counter, all digits of radix q.
class GrayCounter {
 public:
  void reset(int digits, int radix) {
    n_ = digits;
    q_ = radix;
    a_.assign(n_, 0);
    o_.assign(n_, 1);
    f_.resize(n_ + 1);
    for (int j = 0; j <= n_; ++j) f_[j] = j;
  }

  /// Advances one step. Returns the changed digit and sets delta (+1/-1),
  /// or returns -1 when every tuple has been visited.
  int next(int& delta) {
    if (q_ < 2 || n_ == 0) return -1;
    const int j = f_[0];
    f_[0] = 0;
    if (j == n_) return -1;
    a_[j] += o_[j];
    delta = o_[j];
    if (a_[j] == 0 || a_[j] == q_ - 1) {
      o_[j] = -o_[j];
      f_[j] = f_[j + 1];
      f_[j + 1] = j + 1;
    }
    return j;
  }

  const std::vector<int>& digits() const { return a_; }

 private:
  int n_ = 0, q_ = 2;
  std::vector<int> a_, o_, f_;
};

/// Result of one exhaustive pass. Group tables are indexed by
/// sum_i label(member_i) * q^i and normalized to total mass one.
struct Posterior {
  double log_z = 0.0;
  std::vector<std::vector<double>> marginals;
  std::vector<std::vector<double>> groups;
};

/// Exhaustive summation over all labelings of the unpinned vertices, each
/// weighted by prod_e Q(y_e | x_u, x_v). Labels change one vertex at a time
/// in reflected Gray order so each step costs O(degree). Buffers persist
/// across calls; one enumerator per thread.
class PosteriorEnumerator {
 public:
  explicit PosteriorEnumerator(std::int64_t cap = kDefaultEnumerationCap) : cap_(cap) {}

  /// pinned[u] is a label or kErased. Vertices in a group may repeat only
  /// if the caller accepts the resulting diagonal indexing.
  const Posterior& run(const Graph& g, const Kernel& kernel, const std::vector<int>& y,
                       const std::vector<int>& pinned,
                       const std::vector<std::vector<int>>& groups = {},
                       bool want_marginals = true);

  std::int64_t cap() const { return cap_; }

 private:
  struct IncidentEdge {
    int edge;
    int other;      // -1 for a self-loop
    bool outgoing;
  };
  struct Membership {
    int group;
    int stride;
  };

  std::int64_t cap_;
  Posterior result_;
  std::vector<int> labels_;
  std::vector<int> free_;
  std::vector<double> log_table_;
  std::vector<unsigned char> zero_table_;
  std::vector<std::vector<IncidentEdge>> incident_;
  std::vector<std::vector<Membership>> member_of_;
  std::vector<int> member_start_;
  std::vector<Membership> members_;
  std::vector<long double> acc_;
  std::vector<std::size_t> offset_;
  std::vector<std::size_t> cursor_;
  std::vector<long double> last_flush_;
  GrayCounter counter_;
};

/// Convenience wrapper using a fresh enumerator.
Posterior enumerate_posterior(const Graph& g, const Kernel& kernel, const std::vector<int>& y,
                              const std::vector<int>& pinned,
                              const std::vector<std::vector<int>>& groups = {},
                              bool want_marginals = true,
                              std::int64_t cap = kDefaultEnumerationCap);

}  // namespace zqsync
