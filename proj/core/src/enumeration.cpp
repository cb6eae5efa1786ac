#include "zqsync/enumeration.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace zqsync {

namespace {

std::string cap_message(const std::string& what, double required, double cap) {
  std::ostringstream msg;
  msg << what << ": enumeration needs " << required << " configurations, cap is " << cap;
  return msg.str();
}

constexpr double kRescaleGap = 600.0;
constexpr std::int64_t kGroupTableCap = std::int64_t{1} << 22;

}  // namespace

CapExceeded::CapExceeded(const std::string& what, double required, double cap)
    : std::runtime_error(cap_message(what, required, cap)), required_(required), cap_(cap) {}

double power_count(int q, int count) { return std::pow(static_cast<double>(q), count); }

const Posterior& PosteriorEnumerator::run(const Graph& g, const Kernel& kernel,
                                          const std::vector<int>& y,
                                          const std::vector<int>& pinned,
                                          const std::vector<std::vector<int>>& groups,
                                          bool want_marginals) {
  const int n = g.n;
  const int q = kernel.q();
  const int m = g.num_edges();
  if (static_cast<int>(y.size()) != m || static_cast<int>(pinned.size()) != n)
    throw std::invalid_argument("enumeration: instance size does not match graph");

  free_.clear();
  labels_.assign(n, 0);
  for (int u = 0; u < n; ++u) {
    if (pinned[u] == kErased) {
      free_.push_back(u);
    } else {
      if (pinned[u] < 0 || pinned[u] >= q) throw std::invalid_argument("enumeration: bad pinned label");
      labels_[u] = pinned[u];
    }
  }
  const int nf = static_cast<int>(free_.size());
  const double required = power_count(q, nf);
  if (required > static_cast<double>(cap_)) throw CapExceeded("exact posterior", required, static_cast<double>(cap_));

  const std::size_t qq = static_cast<std::size_t>(q) * q;
  log_table_.assign(static_cast<std::size_t>(m) * qq, 0.0);
  zero_table_.assign(static_cast<std::size_t>(m) * qq, 0);
  for (int e = 0; e < m; ++e) {
    if (y[e] < 0 || y[e] >= kernel.y_size()) throw std::invalid_argument("enumeration: bad observation");
    for (int a = 0; a < q; ++a) {
      for (int b = 0; b < q; ++b) {
        const double v = kernel(y[e], a, b);
        const std::size_t idx = e * qq + a * q + b;
        if (v > 0.0) {
          log_table_[idx] = std::log(v);
        } else {
          zero_table_[idx] = 1;
        }
      }
    }
  }

  incident_.resize(n);
  for (int u = 0; u < n; ++u) incident_[u].clear();
  for (int e = 0; e < m; ++e) {
    auto [a, b] = g.edges[e];
    if (a == b) {
      incident_[a].push_back({e, -1, true});
    } else {
      incident_[a].push_back({e, b, true});
      incident_[b].push_back({e, a, false});
    }
  }

  // Internal group list: caller groups first, then one singleton per free vertex.
  const int user_groups = static_cast<int>(groups.size());
  const int total_groups = user_groups + (want_marginals ? nf : 0);
  member_of_.resize(n);
  for (int u = 0; u < n; ++u) member_of_[u].clear();
  offset_.assign(total_groups + 1, 0);
  last_flush_.assign(total_groups, 0.0L);
  cursor_.assign(total_groups, 0);
  for (int gi = 0; gi < total_groups; ++gi) {
    std::int64_t size = 1;
    auto add_member = [&](int v, int stride) {
      if (v < 0 || v >= n) throw std::invalid_argument("enumeration: group vertex out of range");
      if (pinned[v] == kErased) {
        member_of_[v].push_back({gi, stride});
      } else {
        cursor_[gi] += static_cast<std::size_t>(pinned[v]) * stride;
      }
    };
    if (gi < user_groups) {
      int stride = 1;
      for (int v : groups[gi]) {
        add_member(v, stride);
        size *= q;
        if (size > kGroupTableCap) throw CapExceeded("group table", static_cast<double>(size), static_cast<double>(kGroupTableCap));
        stride *= q;
      }
    } else {
      add_member(free_[gi - user_groups], 1);
      size = q;
    }
    offset_[gi + 1] = offset_[gi] + static_cast<std::size_t>(size);
  }
  acc_.assign(offset_[total_groups], 0.0L);
  for (int gi = 0; gi < total_groups; ++gi) cursor_[gi] += offset_[gi];
  member_start_.assign(n + 1, 0);
  members_.clear();
  for (int u = 0; u < n; ++u) {
    members_.insert(members_.end(), member_of_[u].begin(), member_of_[u].end());
    member_start_[u + 1] = static_cast<int>(members_.size());
  }

  double logw = 0.0;
  int zeros = 0;
  for (int e = 0; e < m; ++e) {
    auto [a, b] = g.edges[e];
    const std::size_t idx = e * qq + labels_[a] * q + labels_[b];
    logw += log_table_[idx];
    zeros += zero_table_[idx];
  }

  double ref = 0.0;
  bool have_ref = false;
  long double total = 0.0L;
  counter_.reset(nf, q);
  for (;;) {
    if (zeros == 0) {
      if (!have_ref) {
        ref = logw;
        have_ref = true;
      } else if (logw > ref + kRescaleGap) {
        const long double scale = std::exp(ref - logw);
        total *= scale;
        for (auto& v : last_flush_) v *= scale;
        for (auto& v : acc_) v *= scale;
        ref = logw;
      }
      total += std::exp(logw - ref);
    }
    int delta = 0;
    const int j = counter_.next(delta);
    if (j < 0) break;
    const int v = free_[j];
    for (int i = member_start_[v]; i < member_start_[v + 1]; ++i) {
      const Membership mem = members_[i];
      acc_[cursor_[mem.group]] += total - last_flush_[mem.group];
      last_flush_[mem.group] = total;
      cursor_[mem.group] += static_cast<std::ptrdiff_t>(delta) * mem.stride;
    }
    const int old_label = labels_[v];
    const int new_label = old_label + delta;
    for (const auto& inc : incident_[v]) {
      const std::size_t base = inc.edge * qq;
      std::size_t before, after;
      if (inc.other < 0) {
        before = base + old_label * q + old_label;
        after = base + new_label * q + new_label;
      } else if (inc.outgoing) {
        before = base + old_label * q + labels_[inc.other];
        after = base + new_label * q + labels_[inc.other];
      } else {
        before = base + labels_[inc.other] * q + old_label;
        after = base + labels_[inc.other] * q + new_label;
      }
      logw += log_table_[after] - log_table_[before];
      zeros += zero_table_[after] - zero_table_[before];
    }
    labels_[v] = new_label;
  }
  for (int gi = 0; gi < total_groups; ++gi) acc_[cursor_[gi]] += total - last_flush_[gi];

  if (!(total > 0.0L)) throw ZeroLikelihood();

  result_.log_z = static_cast<double>(ref + std::log(total));
  result_.groups.resize(user_groups);
  for (int gi = 0; gi < user_groups; ++gi) {
    auto& out = result_.groups[gi];
    out.resize(offset_[gi + 1] - offset_[gi]);
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = static_cast<double>(acc_[offset_[gi] + s] / total);
  }
  if (want_marginals) {
    result_.marginals.resize(n);
    for (int u = 0; u < n; ++u) {
      result_.marginals[u].assign(q, 0.0);
      if (pinned[u] != kErased) result_.marginals[u][pinned[u]] = 1.0;
    }
    for (int j = 0; j < nf; ++j) {
      const long double* a = &acc_[offset_[user_groups + j]];
      auto& out = result_.marginals[free_[j]];
      for (int x = 0; x < q; ++x) out[x] = static_cast<double>(a[x] / total);
    }
  } else {
    result_.marginals.clear();
  }
  return result_;
}

Posterior enumerate_posterior(const Graph& g, const Kernel& kernel, const std::vector<int>& y,
                              const std::vector<int>& pinned,
                              const std::vector<std::vector<int>>& groups, bool want_marginals,
                              std::int64_t cap) {
  PosteriorEnumerator en(cap);
  return en.run(g, kernel, y, pinned, groups, want_marginals);
}

}  // namespace zqsync
