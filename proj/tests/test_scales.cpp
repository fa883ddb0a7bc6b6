// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "mhdc/errors.hpp"
#include "mhdc/scales.hpp"

using namespace mhdc;

namespace {

// Independent evaluation of m A^ceil(e) in exact integers.
mpz_class ladder_value(long m, long A, double e) {
  mpz_class z;
  mpz_ui_pow_ui(z.get_mpz_t(), static_cast<unsigned long>(A), static_cast<unsigned long>(std::ceil(e - 1e-12)));
  return z * m;
}

}  // namespace

TEST(MStar, DenominatorsThreeAndFive) {
  EXPECT_EQ(compute_m_star({builtin_lambda_B(16), builtin_lambda_B(10)}), 15);
  EXPECT_EQ(compute_m_star({builtin_lambda_B(16)}), 3);
  EXPECT_EQ(compute_m_star({builtin_lambda_B(10)}), 5);
}

TEST(MStar, IntegerDirections) {
  FrameSet fs;
  Frame f;
  f.eta = {mpq_class(0), mpq_class(0), mpq_class(1)};
  f.eta1 = {mpq_class(1), mpq_class(0), mpq_class(0)};
  f.eta2 = {mpq_class(0), mpq_class(1), mpq_class(0)};
  fs.frames = {f};
  EXPECT_EQ(compute_m_star({fs}), 1);
}

TEST(Plan, ThreeDimensionalFirstLevel) {
  CascadeParams p;
  p.d = 3;
  p.A = 2;
  p.b = 2;
  p.m_star = 15;
  p.k_max = 2;
  const ScalePlan plan = build_plan(p);
  for (int j = 1; j <= p.J_d; ++j)
    if (plan.has_N(j, 1)) EXPECT_EQ(plan.n_at(j, 1), mpz_class(60));
  EXPECT_EQ(plan.n_at(1, 2), ladder_value(15, 2, 4.0));
  EXPECT_EQ(plan.n_at(1, 0), mpz_class(1));
}

TEST(Plan, TwoDimensionalFirstDirection) {
  CascadeParams p;
  p.d = 2;
  p.A = 2;
  p.b = 2;
  p.m_star = 15;
  p.k_max = 1;
  const ScalePlan plan = build_plan(p);
  EXPECT_EQ(plan.n_at(1, 1), mpz_class(60));
  for (int j = 2; j <= p.J_d; ++j)
    EXPECT_EQ(plan.n_at(j, 1), ladder_value(15, 2, std::pow(2.0, 1.0 + (j - 1.0) / p.J_d)));
  for (int j = 1; j < p.J_d; ++j) EXPECT_LE(plan.n_at(j, 1), plan.n_at(j + 1, 1));
  EXPECT_LE(plan.n_at(p.J_d, 1), plan.n_at(1, 2));
}

TEST(Plan, TimesAndLengths) {
  for (int d : {2, 3}) {
    CascadeParams p;
    p.d = d;
    p.A = 4;
    p.k_max = 2;
    const ScalePlan plan = build_plan(p);
    for (int k = 1; k <= p.k_max; ++k) {
      const int J = d == 2 ? p.J_d : 1;
      const double N = plan.nd(J, k);
      EXPECT_NEAR(plan.t.at(k) * N * N * N * N, 1.0, 1e-12);
      EXPECT_NEAR(plan.ell.at(k), 1.0 / std::sqrt(plan.nd(1, k) * plan.nd(1, k + 1)), 1e-12 * plan.ell.at(k));
      if (d == 3) EXPECT_LE(plan.ell.at(k), 1.0 / N);
    }
  }
}

TEST(Plan, IntegerWavevectors) {
  const std::vector<FrameSet> sets = {default_lambda_u(), builtin_lambda_B(16)};
  CascadeParams p;
  p.k_max = 2;
  p.m_star = compute_m_star(sets);
  const ScalePlan plan = build_plan(p);
  EXPECT_TRUE(integer_wavevectors(plan, sets));
  p.m_star = 1;
  const ScalePlan bad = build_plan(p);
  EXPECT_FALSE(integer_wavevectors(bad, sets));
}

TEST(Plan, GammaDefault) {
  EXPECT_DOUBLE_EQ(default_gamma(4.0, 1), 0.5);
  EXPECT_DOUBLE_EQ(default_gamma(2.0, 1), 0.75);
  const double g = default_gamma(2.0, 22);
  EXPECT_GT(g, std::pow(2.0, -1.0 / 22));
  EXPECT_LT(g, 1.0);
  EXPECT_NEAR(g, 0.5 * (std::pow(2.0, -1.0 / 22) + 1.0), 1e-15);
}

TEST(Separation, LargeAPassesAtFactorTwo) {
  CascadeParams p;
  p.A = 16;
  p.b = 2;
  p.k_max = 2;
  const ScalePlan plan = build_plan(p);
  EXPECT_TRUE(verify_separation(plan, 2.0).pass);
}

TEST(Separation, TightPlanListsFailures) {
  CascadeParams p;
  p.A = 2;
  p.b = 2;
  p.k_max = 2;
  const ScalePlan plan = build_plan(p);
  const SeparationReport r = verify_separation(plan, 4.0);
  EXPECT_FALSE(r.pass);
  bool listed = false;
  for (const auto& c : r.checks) listed = listed || !c.holds;
  EXPECT_TRUE(listed);
}

TEST(Separation, FactorOneAcceptsNonStrict) {
  CascadeParams p;
  p.A = 8;
  const ScalePlan plan = build_plan(p);
  const SeparationReport r = verify_separation(plan, 1.0);
  for (const auto& c : r.checks) EXPECT_EQ(c.holds, c.log_ratio >= 0.0);
}

TEST(Plan, JsonAndCsv) {
  CascadeParams p;
  const ScalePlan plan = build_plan(p);
  const std::string csv = plan_csv(plan);
  EXPECT_EQ(csv.rfind("j,k,N,M,t,ell", 0), 0u);
  const nlohmann::json j = plan_to_json(plan);
  EXPECT_TRUE(j.contains("params"));
  EXPECT_TRUE(j.contains("ladder"));
  EXPECT_EQ(j["params"]["m_star"].get<long>(), p.m_star);
}
