#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "zqsync/graphs.hpp"
#include "zqsync/inference.hpp"
#include "zqsync/model.hpp"
#include "zqsync/rng.hpp"
#include "zqsync/thresholds.hpp"
#include "zqsync/tree_recursion.hpp"

using namespace zqsync;

namespace {

RecursionOptions options(std::int64_t trials, std::uint64_t seed) {
  RecursionOptions o;
  o.trials = trials;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("level zero carries no information") {
  const RecursionTrace tr = simulate_root_statistic(TreeKind::ary, 3, 2, 0.4, 0.2, 3, options(200, 1));
  CHECK(tr.levels.size() == 4);
  CHECK(tr.levels[0].z_hat.mean == 0.0);
  CHECK(tr.levels[0].z_hat.std_error == 0.0);
  CHECK(tr.kappa == doctest::Approx(kesten_stigum(3, 0.4)));
  const RecursionTrace reg = simulate_root_statistic(TreeKind::regular, 3, 2, 0.4, 0.2, 2, options(50, 1));
  CHECK(reg.kappa == doctest::Approx(kesten_stigum_root(3, 0.4)));
}

TEST_CASE("noiseless channel reconstructs the root once leaves are revealed") {
  const RecursionTrace tr = simulate_root_statistic(TreeKind::ary, 3, 3, 0.0, 1.0, 2, options(50, 2));
  for (int l = 1; l <= 2; ++l) CHECK(tr.levels[l].z_hat.mean == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("pure-noise channel gives zero residuals") {
  const RecursionTrace tr = simulate_root_statistic(TreeKind::ary, 3, 2, 1.0, 0.0, 4, options(100, 3));
  const ResidualFit fit = recursion_residual(tr);
  for (const auto& pt : fit.points) CHECK(pt.r == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("property: Bayes identity E[l2 | erased root] = z within noise") {
  for (double eps : {0.05, 0.3})
    for (int q : {2, 3}) {
      const RecursionTrace tr = simulate_root_statistic(TreeKind::ary, 3, q, 0.3, eps, 4, options(4000, 4));
      for (const auto& rec : tr.levels)
        CHECK(std::abs(rec.l2_minus_z.mean) <= 4.0 * rec.l2_minus_z.std_error + 1e-15);
    }
}

TEST_CASE("property: z is nondecreasing in depth within noise") {
  const RecursionTrace tr = simulate_root_statistic(TreeKind::ary, 3, 2, 0.3, 0.1, 6, options(4000, 5));
  for (int l = 1; l < 6; ++l) {
    const auto& a = tr.levels[l];
    const auto& b = tr.levels[l + 1];
    CHECK(b.z_hat.mean >= a.z_hat.mean - 4.0 * std::hypot(a.z_hat.std_error, b.z_hat.std_error));
  }
}

TEST_CASE("below the threshold z stays within 10 eps") {
  const RecursionTrace tr = simulate_root_statistic(TreeKind::ary, 3, 2, 0.4, 0.02, 6, options(10000, 6));
  CHECK(tr.levels[6].z_hat.mean <= 10.0 * 0.02);
  const ResidualFit fit = recursion_residual(tr);
  const double big_l = stability_envelope(fit.c_fit, tr.kappa, 2);
  for (const auto& rec : tr.levels)
    CHECK(rec.z_hat.mean <= big_l * 0.02 + 3.0 * rec.z_hat.std_error);
}

TEST_CASE("residual scaling in eps") {
  // The eps^2 term dominates at small z, so the residual grows sub-linearly
  // relative to the envelope when eps doubles.
  const RecursionTrace a = simulate_root_statistic(TreeKind::ary, 3, 2, 0.4, 0.01, 5, options(20000, 7));
  const RecursionTrace b = simulate_root_statistic(TreeKind::ary, 3, 2, 0.4, 0.02, 5, options(20000, 8));
  const ResidualFit fa = recursion_residual(a), fb = recursion_residual(b);
  const auto& pa = fa.points.back();
  const auto& pb = fb.points.back();
  CHECK(pb.envelope / pa.envelope > 3.0);
  CHECK(pb.r / pb.envelope <= 2.0 * pa.r / pa.envelope + 3.0 * (pa.se / pa.envelope + pb.se / pb.envelope));
}

TEST_CASE("stability envelope") {
  CHECK(stability_envelope(0.5, 0.72, 2) == doctest::Approx((0.5 + 0.36) / (4 * 0.28) + 1.0));
  CHECK(std::isinf(stability_envelope(0.5, 1.2, 2)));
}

TEST_CASE("unconditional dtv2 mixes the revealed root") {
  LevelRecord rec;
  rec.dtv2.mean = 0.1;
  rec.dtv2.std_error = 0.01;
  const MCEstimate u = unconditional_dtv2(rec, 0.2, 3);
  CHECK(u.mean == doctest::Approx(0.2 * 4.0 / 9 + 0.8 * 0.1));
  CHECK(u.std_error == doctest::Approx(0.008));
}

TEST_CASE("reweighting lemma") {
  RecursionOptions o = options(20000, 9);
  const ReweightingReport r = reweighting_check(3, 2, 0.3, 0.1, 2, o);
  CHECK(r.entries.size() == 10);
  CHECK(r.max_z <= 4.0);
  for (const auto& e : r.entries)
    if (e.psi == 4) {
      CHECK(e.conditioned.mean == 1.0);
      CHECK(e.weighted.mean == doctest::Approx(1.0).epsilon(0.05));
    }
  const ReweightingReport flat = reweighting_check(3, 2, 1.0, 0.1, 2, options(2000, 10));
  CHECK(flat.max_z <= 4.0);
}

TEST_CASE("phase probe") {
  const PhaseReport rep = ks_phase_probe(3, 2, 0.4, 0.1, {0.02, 0.1}, 5, options(2000, 11));
  CHECK(rep.below.size() == 2);
  CHECK(rep.above.size() == 2);
  CHECK(rep.below[0].kappa == doctest::Approx(0.72));
  CHECK(rep.above[0].kappa == doctest::Approx(1.62));
  CHECK(rep.above[0].plateau.mean > rep.below[0].plateau.mean);
  CHECK_THROWS(ks_phase_probe(3, 2, 0.4, 0.3, {0.1}, 3, options(10, 1)));
}

TEST_CASE("determinism across worker counts") {
  RecursionOptions a = options(300, 12), b = a;
  b.jobs = 3;
  const RecursionTrace ta = simulate_root_statistic(TreeKind::ary, 3, 2, 0.3, 0.1, 4, a);
  const RecursionTrace tb = simulate_root_statistic(TreeKind::ary, 3, 2, 0.3, 0.1, 4, b);
  for (int l = 0; l <= 4; ++l) {
    CHECK(ta.levels[l].z_hat.mean == tb.levels[l].z_hat.mean);
    CHECK(ta.levels[l].dtv2.mean == tb.levels[l].dtv2.mean);
  }
}

TEST_CASE("invalid arguments") {
  CHECK_THROWS(simulate_root_statistic(TreeKind::ary, 1, 2, 0.3, 0.1, 3, options(10, 1)));
  CHECK_THROWS(simulate_root_statistic(TreeKind::ary, 3, 2, 1.3, 0.1, 3, options(10, 1)));
  CHECK_THROWS(simulate_root_statistic(TreeKind::ary, 3, 2, 0.3, 0.1, 3, options(0, 1)));
}
