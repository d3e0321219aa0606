#include <doctest.h>

#include <cmath>

#include "sparseshield/bounds.hpp"
#include "sparseshield/measures.hpp"
#include "sparseshield/pursuit.hpp"
#include "support.hpp"

using namespace sparseshield;

TEST_SUITE_BEGIN("bounds");

TEST_CASE("thm5: orthogonal limit and square-root domain collapse") {
  BoundReport r = thm5_binary(0.0, 4, 1.0, 1.0);
  CHECK(r.feasible);
  CHECK(r.eps_max == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_FALSE(r.k_max.has_value());  // no finite ceiling at mu = 0

  // (2k-1) mu >= 1 collapses the certificate
  BoundReport collapsed = thm5_binary(0.2, 3, 1.0, 1.0);
  CHECK_FALSE(collapsed.feasible);
  CHECK(collapsed.eps_max == 0.0);
}

TEST_CASE("thm5 rejects premise violations") {
  CHECK_THROWS_AS(thm5_binary(0.1, 4, 1.0, 0.0), premise_violation);
  CHECK_THROWS_AS(thm5_binary(0.1, 4, 1.0, -1.0), premise_violation);
  CHECK_THROWS_AS(thm5_binary(-0.1, 4, 1.0, 1.0), premise_violation);
  CHECK_THROWS_AS(thm5_binary(1.0, 4, 1.0, 1.0), premise_violation);
  CHECK_THROWS_AS(thm5_binary(0.1, 0, 1.0, 1.0), premise_violation);
}

TEST_CASE("thm5 sparsity ceiling inverts the eps direction") {
  const double mu = 0.05;
  BoundReport r = thm5_binary(mu, 4, 1.0, 1.0, /*eps=*/0.1);
  REQUIRE(r.k_max.has_value());
  // the certificate at k = k_max must admit eps = 0.1, and k_max + 1 must not
  BoundReport at_kmax = thm5_binary(mu, *r.k_max, 1.0, 1.0);
  CHECK(at_kmax.eps_max > 0.1);
  BoundReport above = thm5_binary(mu, *r.k_max + 1, 1.0, 1.0);
  CHECK(above.eps_max <= 0.1 + 1e-12);
}

TEST_CASE("thm5 eps_max is validated by a randomized perturbation search") {
  // any feasible representation of the perturbed signal classifies
  // correctly below eps_max; least-squares pursuit on the true support
  // realizes the problem the certificate covers
  Rng rng(515);
  double mu = 0.0;
  Dictionary d = testsupport::reduced_dictionary(30, 15, 0.0, rng, &mu);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = testsupport::make_cor1_instance(d, mu, 3, rng);
    BoundReport r = thm5_binary(mu, inst.code.l0(), 1.0, inst.margin);
    REQUIRE(r.feasible);
    for (int probe = 0; probe < 30; ++probe) {
      const Vec e = (0.99 * r.eps_max) * testsupport::random_direction(30, rng);
      const Vec y = inst.clean + e;
      // least squares restricted to the true support
      Mat ds(30, inst.code.l0());
      for (int j = 0; j < inst.code.l0(); ++j)
        ds.col(j) = d.matrix().col(inst.code.support()[static_cast<size_t>(j)]);
      const Vec coef = ds.colPivHouseholderQr().solve(y);
      Vec est = Vec::Zero(15);
      for (int j = 0; j < inst.code.l0(); ++j)
        est(inst.code.support()[static_cast<size_t>(j)]) = coef(j);
      const double score = inst.clf.score(est);
      CHECK((score >= 0.0 ? 1 : -1) == inst.label);
    }
  }
}

TEST_CASE("thm7 with L=2 and phi = ||w|| reproduces thm5 bit for bit") {
  Rng rng(62);
  for (int trial = 0; trial < 50; ++trial) {
    const double mu = rng.uniform(0.0, 0.2);
    const int k = 1 + static_cast<int>(rng.uniform_index(5));
    const double w = rng.uniform(0.2, 3.0);
    const double margin = rng.uniform(0.1, 2.0);
    BoundReport five = thm5_binary(mu, k, w, margin);
    BoundReport seven = thm7_multiclass(mu, k, w, margin);
    CHECK(five.feasible == seven.feasible);
    CHECK(five.eps_max == seven.eps_max);  // exact equality, shared path
    CHECK(five.k_max == seven.k_max);
  }
}

TEST_CASE("thm7 flags phi = 0 as degenerate, never infinite") {
  BoundReport r = thm7_multiclass(0.1, 3, 0.0, 1.0);
  CHECK(r.degenerate);
  CHECK_FALSE(r.feasible);
  CHECK(r.eps_max == 0.0);
  CHECK(std::isfinite(r.eps_max));
}

TEST_CASE("thm10: single-layer arithmetic example") {
  // k=2, mu=0.1, |G_max|=2, beta=0.5, eps0=0.1, patch sparsity 2
  std::vector<LthrLayerParams> layers{{0.1, 2, 2, 1.0, 2.0}};
  BoundReport r = thm10_lthr(layers, {0.5}, 0.1, 1.0, 2, 10.0);
  REQUIRE(r.eps_chain.size() == 2);
  // C_1 = (2-1) * 0.1 * 2 = 0.2; eps_1 = sqrt(2) * (0.1 + 0.2 + 0.5)
  CHECK(r.eps_chain[1] == doctest::Approx(std::sqrt(2.0) * 0.8).epsilon(1e-12));
  CHECK(r.eps_chain[1] == doctest::Approx(1.13137).epsilon(1e-4));
}

TEST_CASE("thm10: mu = 0 layers give the (eps, gmin - eps) window") {
  std::vector<LthrLayerParams> layers{{0.0, 3, 3, 1.0, 2.0}, {0.0, 2, 2, 0.8, 1.5}};
  const double eps0 = 0.07;
  BoundReport r = thm10_lthr(layers, {}, eps0, 1.0, 2, 100.0);
  REQUIRE(r.beta_windows.size() == 2);
  CHECK(r.beta_windows[0].lo == doctest::Approx(eps0));
  CHECK(r.beta_windows[0].hi == doctest::Approx(1.0 - eps0));
  const double eps1 = r.eps_chain[1];
  CHECK(r.beta_windows[1].lo == doctest::Approx(eps1));
  CHECK(r.beta_windows[1].hi == doctest::Approx(0.8 - eps1));
}

TEST_CASE("thm10 reports the offending layer when a window is empty") {
  // second layer's window is empty: gmin too small against the interference
  std::vector<LthrLayerParams> layers{{0.0, 2, 2, 1.0, 2.0},
                                      {0.2, 4, 4, 0.5, 2.0}};
  BoundReport r = thm10_lthr(layers, {}, 0.0, 1.0, 2, 100.0);
  CHECK_FALSE(r.feasible);
  REQUIRE(r.infeasible_layer.has_value());
  CHECK(*r.infeasible_layer == 1);
}

TEST_CASE("thm11: chain arithmetic and the k ceiling") {
  std::vector<LbpLayerParams> layers{{0.01, 2, 4}, {0.01, 1, 1}};
  BoundReport r = thm11_lbp(layers, 0.1, 1.0, 2, 1000.0);
  REQUIRE(r.eps_chain.size() == 3);
  // eps_2 = 0.1 * 7.5^2 * sqrt(4) * sqrt(1) = 11.25
  CHECK(r.eps_chain[2] == doctest::Approx(11.25).epsilon(1e-12));
  CHECK(r.xi_schedule[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(r.xi_schedule[1] == doctest::Approx(4.0 * r.eps_chain[1]).epsilon(1e-12));

  // mu = 0.1 -> floor((1 + 10)/3) = 3
  BoundReport c = cor2_bp(0.1, 3, 1.0, 1.0);
  REQUIRE(c.k_max.has_value());
  CHECK(*c.k_max == 3);
  std::vector<LbpLayerParams> over{{0.1, 4, 4}};
  BoundReport r2 = thm11_lbp(over, 0.0, 1.0, 4, 1.0);
  CHECK_FALSE(r2.feasible);
  REQUIRE(r2.infeasible_layer.has_value());
  CHECK(*r2.infeasible_layer == 0);
}

TEST_CASE("cor1 with mu = 0 matches a grid-search oracle over the coupled beta rule") {
  // the oracle scans eps on a fine grid, applies the same lower-edge + 10%
  // width selection, and keeps the largest eps satisfying all constraints
  const int k = 4;
  const double gmin = 1.0, gmax = 2.0, w = 1.0, margin = 1.0;
  BoundReport r = cor1_thr(0.0, k, gmin, gmax, w, margin);
  REQUIRE(r.feasible);

  const double q = margin / (std::sqrt(static_cast<double>(k)) * w);
  double best = 0.0;
  const int grid = 2000000;
  for (int i = 0; i <= grid; ++i) {
    const double eps = 0.5 * gmin * i / grid;
    const double width = gmin - 2.0 * eps;
    if (width <= 0.0) break;
    const double beta = eps + 0.1 * width;
    if (!(beta > eps)) continue;         // window lower edge
    if (!(beta < gmin - eps)) continue;  // window upper edge
    if (!(eps < q - beta)) continue;     // margin condition
    best = eps;
  }
  CHECK(r.eps_max == doctest::Approx(best).epsilon(1e-5));
  // and the closed-form value itself: (q - 0.1 gmin) / 1.8 when it binds
  CHECK(r.eps_max == doctest::Approx((q - 0.1 * gmin) / 1.8).epsilon(1e-12));
}

TEST_CASE("cor1 with an explicit beta takes the tightest of the four constraints") {
  const double mu = 0.02, gmin = 1.0, gmax = 2.0, w = 1.0, margin = 1.0;
  const int k = 4;
  const double beta = 0.3;
  BoundReport r = cor1_thr(mu, k, gmin, gmax, w, margin, beta);
  const double c = (k - 1) * mu * gmax;
  const double kk = k * mu * gmax;
  const double q = margin / (std::sqrt(static_cast<double>(k)) * w);
  const double expect =
      std::min(std::min(beta - kk, gmin - c - beta),
               std::min(q - c - beta, 0.5 * gmin - (k - 0.5) * mu * gmax));
  CHECK(r.eps_max == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("cor1 collapses on a seeded overcomplete 100x150 dictionary") {
  Rng rng(1234);
  double mu = 0.0;
  Dictionary d = testsupport::reduced_dictionary(100, 150, 0.0, rng, &mu);
  // redundancy keeps mu well above the feasibility knee
  CHECK(mu > 0.04);
  BoundReport r = cor1_thr(mu, 4, 1.0, 2.0, 1.0, 1.0);
  CHECK_FALSE(r.feasible);
  CHECK(r.eps_max == 0.0);
}

TEST_CASE("cor1 rejects k above the sparsity ceiling") {
  // at mu=0.2, gmax=2: the eps budget 0.5 - (k - 0.5) * 0.4 is negative at k=2
  BoundReport r = cor1_thr(0.2, 2, 1.0, 2.0, 1.0, 1.0);
  CHECK_FALSE(r.feasible);
  CHECK(r.eps_max == 0.0);
}

TEST_CASE("cor2: arithmetic, premise ceiling, and the xi rule") {
  BoundReport r = cor2_bp(0.01, 4, 1.0, 1.0);
  CHECK(r.feasible);
  CHECK(r.eps_max == doctest::Approx(1.0 / 30.0).epsilon(1e-15));
  CHECK(r.eps_max == doctest::Approx(0.0333333).epsilon(1e-4));
  REQUIRE(r.xi_schedule.size() == 1);
  CHECK(r.xi_schedule[0] == doctest::Approx(4.0 / 30.0).epsilon(1e-15));

  // mu=0.3, k=4: (1 + 1/0.3)/3 = 1.44 < 4
  BoundReport infeasible = cor2_bp(0.3, 4, 1.0, 1.0);
  CHECK_FALSE(infeasible.feasible);
  CHECK(infeasible.eps_max == 0.0);
}

TEST_CASE("undercomplete toy regime: the BP certificate beats the THR one") {
  Rng rng(99);
  double mu = 0.0;
  Dictionary d = testsupport::reduced_dictionary(100, 40, 0.0295, rng, &mu);
  BoundReport thr = cor1_thr(mu, 4, 1.0, 2.0, 1.0, 1.0);
  BoundReport bp = cor2_bp(mu, 4, 1.0, 1.0);
  CHECK(thr.feasible);
  CHECK(bp.feasible);
  CHECK(bp.eps_max > thr.eps_max);
}

TEST_CASE("reduction identities: thm10/thm11 at K=1 equal cor1/cor2") {
  Rng rng(111);
  for (int trial = 0; trial < 60; ++trial) {
    const double mu = rng.uniform(0.0, 0.08);
    const int k = 1 + static_cast<int>(rng.uniform_index(5));
    const double gmin = rng.uniform(0.5, 1.5);
    const double gmax = gmin + rng.uniform(0.0, 1.5);
    const double w = rng.uniform(0.3, 2.0);
    const double margin = rng.uniform(0.2, 3.0);

    BoundReport c1 = cor1_thr(mu, k, gmin, gmax, w, margin);
    BoundReport t10 = thm10_lthr({{mu, k, k, gmin, gmax}}, {}, 0.0, w, k, margin);
    CHECK(std::abs(c1.eps_max - t10.eps_max) <= 1e-12);
    CHECK(c1.feasible == (t10.eps_max > 0.0));

    BoundReport c2 = cor2_bp(mu, k, w, margin);
    BoundReport t11 = thm11_lbp({{mu, k, k}}, 0.0, w, k, margin);
    CHECK(std::abs(c2.eps_max - t11.eps_max) <= 1e-12);
    CHECK(c2.feasible == (t11.eps_max > 0.0));
  }
}

TEST_CASE("eps_max is monotone in every certificate input") {
  Rng rng(222);
  for (int trial = 0; trial < 80; ++trial) {
    const double mu = rng.uniform(0.0, 0.05);
    const int k = 1 + static_cast<int>(rng.uniform_index(4));
    const double w = rng.uniform(0.3, 2.0);
    const double margin = rng.uniform(0.3, 2.0);
    const double dmu = rng.uniform(0.0, 0.03);
    const double dw = rng.uniform(0.0, 1.0);
    const double dmargin = rng.uniform(0.0, 1.0);

    CHECK(thm5_binary(mu + dmu, k, w, margin).eps_max <=
          thm5_binary(mu, k, w, margin).eps_max + 1e-15);
    CHECK(thm5_binary(mu, k + 1, w, margin).eps_max <=
          thm5_binary(mu, k, w, margin).eps_max + 1e-15);
    CHECK(thm5_binary(mu, k, w + dw, margin).eps_max <=
          thm5_binary(mu, k, w, margin).eps_max + 1e-15);
    CHECK(thm5_binary(mu, k, w, margin + dmargin).eps_max >=
          thm5_binary(mu, k, w, margin).eps_max - 1e-15);

    CHECK(cor1_thr(mu + dmu, k, 1.0, 2.0, w, margin).eps_max <=
          cor1_thr(mu, k, 1.0, 2.0, w, margin).eps_max + 1e-15);
    CHECK(cor1_thr(mu, k + 1, 1.0, 2.0, w, margin).eps_max <=
          cor1_thr(mu, k, 1.0, 2.0, w, margin).eps_max + 1e-15);
    CHECK(cor1_thr(mu, k, 1.0, 2.0, w + dw, margin).eps_max <=
          cor1_thr(mu, k, 1.0, 2.0, w, margin).eps_max + 1e-15);
    CHECK(cor1_thr(mu, k, 1.0, 2.0, w, margin + dmargin).eps_max >=
          cor1_thr(mu, k, 1.0, 2.0, w, margin).eps_max - 1e-15);

    CHECK(cor2_bp(mu + dmu, k, w, margin).eps_max <=
          cor2_bp(mu, k, w, margin).eps_max + 1e-15);
    CHECK(cor2_bp(mu, k + 1, w, margin).eps_max <=
          cor2_bp(mu, k, w, margin).eps_max + 1e-15);
    CHECK(cor2_bp(mu, k, w + dw, margin).eps_max <=
          cor2_bp(mu, k, w, margin).eps_max + 1e-15);
    CHECK(cor2_bp(mu, k, w, margin + dmargin).eps_max >=
          cor2_bp(mu, k, w, margin).eps_max - 1e-15);
  }
}

TEST_CASE("degenerate classifier scales are flagged, not infinite") {
  CHECK(thm5_binary(0.1, 2, 0.0, 1.0).degenerate);
  CHECK(cor1_thr(0.1, 2, 1.0, 2.0, 0.0, 1.0).degenerate);
  CHECK(cor2_bp(0.1, 2, 0.0, 1.0).degenerate);
}

TEST_CASE("3-class thm7 certificate survives exhaustive random-direction probing") {
  Rng rng(733);
  double mu = 0.0;
  Dictionary d = testsupport::reduced_dictionary(30, 15, 0.0, rng, &mu);
  int built = 0;
  while (built < 10) {
    Mat w(15, 3);
    for (int u = 0; u < 3; ++u) w.col(u) = testsupport::random_direction(15, rng);
    MultiClassifier mclf(w, Vec::Zero(3));
    SparseCode code = testsupport::random_sparse_code(15, 3, 1.0, 2.0, rng);
    const Classification clean = classify(code, mclf);
    const double margin = multiclass_margin(code, mclf, clean.label);
    if (margin < 0.3) continue;
    ++built;
    BoundReport r = thm7_multiclass(mu, 3, phi(mclf), margin);
    REQUIRE(r.feasible);
    const Vec clean_sig = d.matrix() * code.dense();
    Mat ds(30, 3);
    for (int j = 0; j < 3; ++j)
      ds.col(j) = d.matrix().col(code.support()[static_cast<size_t>(j)]);
    for (int probe = 0; probe < 50; ++probe) {
      const Vec y =
          clean_sig + (0.99 * r.eps_max) * testsupport::random_direction(30, rng);
      const Vec coef = ds.colPivHouseholderQr().solve(y);
      Vec est = Vec::Zero(15);
      for (int j = 0; j < 3; ++j) est(code.support()[static_cast<size_t>(j)]) = coef(j);
      CHECK(classify(SparseCode::from_dense(est), mclf).label == clean.label);
    }
  }
}

TEST_SUITE_END();
