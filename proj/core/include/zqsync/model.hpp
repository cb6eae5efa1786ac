#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "zqsync/graphs.hpp"

namespace zqsync {

inline constexpr int kErased = -1;
inline constexpr int kAlphabetCap = 16;

/// Conditional law Q(y | x1, x2) stored densely as table[(x1*q + x2)*y_size + y].
class Kernel {
 public:
  Kernel() = default;
  Kernel(int q, int y_size, std::vector<double> table);

  int q() const { return q_; }
  int y_size() const { return y_size_; }
  double operator()(int y, int x1, int x2) const {
    return table_[(static_cast<std::size_t>(x1) * q_ + x2) * y_size_ + y];
  }
  const std::vector<double>& table() const { return table_; }

  /// Noise level when the kernel was built by kernel_zq.
  std::optional<double> zq_noise() const { return zq_noise_; }

  /// Q(y | x1+s, x2+s) = Q(y | x1, x2) for every shift s mod q.
  bool gauge_invariant() const;

 private:
  friend Kernel kernel_zq(int q, double p);
  int q_ = 0;
  int y_size_ = 0;
  std::vector<double> table_;
  std::optional<double> zq_noise_;
};

/// Q(y|x1,x2) = (1-p) 1{y = x1 - x2 mod q} + p/q.
Kernel kernel_zq(int q, double p);

struct Instance {
  std::vector<int> theta0;
  std::vector<int> y;
  std::vector<int> xi;  // kErased or the revealed label
};

/// Draw order: labels by vertex, observations by edge, side channel by vertex.
Instance sample_instance(const Graph& g, const Kernel& kernel, double eps,
                         std::uint64_t seed);

/// Same draw order, but the side channel of listed vertices is forced to erased
/// and labels may be pinned (root_label >= 0 fixes theta0[0]).
Instance sample_instance(const Graph& g, const Kernel& kernel,
                         const std::vector<double>& eps_per_vertex,
                         std::uint64_t seed, int root_label = -1);

/// Restriction of an instance to a ball or induced subgraph.
Instance restrict_instance(const Instance& inst, const Ball& b);

bool side_channel_consistent(const Instance& inst);

struct ChannelStatistics {
  double h_y;
  double h_y_given_theta;
  double mutual_information;
  double c_m;  // +inf when some entry is zero
};

ChannelStatistics channel_statistics(const Kernel& kernel);

/// I(theta1, theta2; Y) in nats with uniform independent labels.
double channel_mutual_information(const Kernel& kernel);

void write_kernel(std::ostream& os, const Kernel& kernel);
Kernel read_kernel(std::istream& is);

}  // namespace zqsync
