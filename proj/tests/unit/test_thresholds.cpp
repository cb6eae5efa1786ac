#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "zqsync/model.hpp"
#include "zqsync/rng.hpp"
#include "zqsync/thresholds.hpp"

using namespace zqsync;

namespace {

double h(const std::vector<double>& p) {
  double s = 0.0;
  for (double v : p)
    if (v > 0.0) s -= v * std::log(v);
  return s;
}

// S(Omega) from its definition, with marginals summed by hand.
double s_direct(const JointEdgeDist& w, int k, const Kernel& kernel) {
  const int q = w.q, ys = w.y_size;
  std::vector<double> avg(q * q, 0.0), nu(q * q * ys, 0.0);
  for (int a = 0; a < q; ++a)
    for (int at = 0; at < q; ++at)
      for (int b = 0; b < q; ++b)
        for (int bt = 0; bt < q; ++bt)
          for (int y = 0; y < ys; ++y) {
            const double v = w.p[w.index(a, at, b, bt, y)];
            avg[a * q + at] += 0.5 * v;
            avg[b * q + bt] += 0.5 * v;
          }
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      for (int y = 0; y < ys; ++y) nu[(a * q + b) * ys + y] = kernel(y, a, b) / (q * q);
  return 0.5 * k * h(w.p) - (k - 1) * h(avg) - 0.5 * k * h(nu) + (k - 1) * std::log(q);
}

}  // namespace

TEST_CASE("kesten-stigum coefficients") {
  CHECK(kesten_stigum(3, 0.4) == doctest::Approx(0.72).epsilon(1e-15));
  CHECK(kesten_stigum(3, 0.1) == doctest::Approx(1.62).epsilon(1e-15));
  CHECK(kesten_stigum(5, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kesten_stigum_root(3, 0.4) == doctest::Approx(1.08).epsilon(1e-15));
}

TEST_CASE("k_star values") {
  CHECK(k_star(0.5, 2) == doctest::Approx(10.5977).epsilon(1e-5));
  CHECK(k_star(0.2, 2) == doctest::Approx(3.766).epsilon(1e-3));
  CHECK_THROWS(k_star(0.0, 2));
  CHECK_THROWS(k_star(1.0, 2));
}

TEST_CASE("property: k_star equals 2 log q over the channel information") {
  for (int q = 2; q <= 8; ++q)
    for (int i = 1; i < 50; ++i) {
      const double p = i / 50.0;
      CHECK(k_star(p, q) == doctest::Approx(2.0 * std::log(q) / channel_mutual_information(kernel_zq(q, p))).epsilon(1e-9));
    }
}

TEST_CASE("property: k_star increases with noise and approaches the high-noise asymptote") {
  for (int q = 2; q <= 6; ++q) {
    double prev = 0.0;
    for (int i = 1; i < 100; ++i) {
      const double v = k_star(i / 100.0, q);
      CHECK(v > prev);
      prev = v;
    }
    const double p = 0.999;
    CHECK(k_star(p, q) * (q - 1) * (1 - p) * (1 - p) / (4.0 * std::log(q)) == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("weak recovery condition") {
  CHECK(weak_recovery_condition(kernel_zq(2, 0.5), 11).satisfied);
  CHECK_FALSE(weak_recovery_condition(kernel_zq(2, 0.5), 10).satisfied);
  CHECK_FALSE(weak_recovery_condition(kernel_zq(3, 1.0), 1000).satisfied);
  const WeakRecovery w = weak_recovery_condition(kernel_zq(2, 0.5), 11);
  CHECK(w.lhs == doctest::Approx(5.5 * channel_mutual_information(kernel_zq(2, 0.5))));
  CHECK(w.rhs == doctest::Approx(std::log(2.0)));
}

TEST_CASE("S functional on known couplings") {
  for (int q : {2, 3})
    for (double p : {0.2, 0.7})
      for (int k : {3, 5}) {
        const Kernel kernel = kernel_zq(q, p);
        CHECK(s_functional(diagonal_coupling(kernel), k, kernel) == doctest::Approx(0.0).epsilon(1e-12));
        const JointEdgeDist ci = conditional_independent_coupling(kernel);
        CHECK(s_functional(ci, k, kernel) == doctest::Approx(s_direct(ci, k, kernel)).epsilon(1e-12));
      }
  // p = 1 and a fully independent uniform Omega: S = log q.
  const int q = 3;
  const Kernel noise = kernel_zq(q, 1.0);
  JointEdgeDist w;
  w.q = q;
  w.y_size = q;
  w.p.assign(q * q * q * q * q, std::pow(q, -5.0));
  CHECK(s_functional(w, 4, noise) == doctest::Approx(std::log(q)).epsilon(1e-12));
}

TEST_CASE("property: S functional matches the direct formula on random couplings") {
  SplitMix64 rng(6);
  for (int t = 0; t < 50; ++t) {
    const int q = 2 + t % 2;
    const Kernel kernel = kernel_zq(q, rng.uniform());
    JointEdgeDist w;
    w.q = q;
    w.y_size = q;
    w.p.resize(static_cast<std::size_t>(q * q * q * q * q));
    double tot = 0.0;
    for (double& v : w.p) tot += (v = rng.uniform());
    for (double& v : w.p) v /= tot;
    const int k = 3 + t % 3;
    const double s = s_functional(w, k, kernel);
    CHECK(s == doctest::Approx(s_direct(w, k, kernel)).epsilon(1e-12));
    CHECK(std::abs(s) <= 0.5 * k * std::log(std::pow(q, 5.0)) + (k - 1) * std::log(q) * 3);
  }
}

TEST_CASE("marginals of couplings") {
  const Kernel kernel = kernel_zq(2, 0.3);
  const JointEdgeDist d = diagonal_coupling(kernel);
  const OverlapDist avg = pair_average_marginal(d);
  CHECK(avg[0][0] == doctest::Approx(0.5));
  CHECK(avg[0][1] == doctest::Approx(0.0));
  const auto e1 = edge_marginal(d, true), e2 = edge_marginal(d, false);
  for (std::size_t i = 0; i < e1.size(); ++i) CHECK(e1[i] == doctest::Approx(e2[i]));
  const OverlapDist u = uniform_product(3);
  for (const auto& row : u)
    for (double v : row) CHECK(v == doctest::Approx(1.0 / 9));
}

TEST_CASE("S_* optimizer") {
  SStarOptions opts;
  for (int q : {2, 3}) {
    const SStarResult r = s_star(uniform_product(q), 3, kernel_zq(q, 1.0), opts);
    CHECK(r.value == doctest::Approx(std::log(q)).epsilon(1e-6));
    CHECK(r.feasibility_residual < 1e-6);
  }
  const Kernel kernel = kernel_zq(2, 0.2);
  const SStarResult r = s_star(uniform_product(2), 4, kernel, opts);
  CHECK(r.value < 0.0);
  CHECK(r.value <= r.upper_bound + 1e-6);
  CHECK(r.upper_bound == doctest::Approx(-2.0 * channel_mutual_information(kernel) + std::log(2.0)).epsilon(1e-12));
  // The argmax is a feasible coupling and its S equals the reported value.
  CHECK(s_functional(r.argmax, 4, kernel) == doctest::Approx(r.value).epsilon(1e-8));
  const OverlapDist avg = pair_average_marginal(r.argmax);
  for (const auto& row : avg)
    for (double v : row) CHECK(v == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("property: S_* never exceeds the analytic bound") {
  SStarOptions opts;
  opts.restarts = 2;
  for (int q : {2, 3})
    for (double p : {0.15, 0.5, 0.85})
      for (int k : {3, 6}) {
        const Kernel kernel = kernel_zq(q, p);
        const SStarResult r = s_star(uniform_product(q), k, kernel, opts);
        CHECK(r.value <= s_star_upper_bound(uniform_product(q), k, kernel) + 1e-6);
        CHECK(r.value >= s_functional(conditional_independent_coupling(kernel), k, kernel) - 1e-6);
      }
  // A non-uniform omega.
  const OverlapDist w = {{0.4, 0.1}, {0.1, 0.4}};
  const Kernel kernel = kernel_zq(2, 0.4);
  CHECK(s_star(w, 3, kernel, opts).value <= s_star_upper_bound(w, 3, kernel) + 1e-6);
}
