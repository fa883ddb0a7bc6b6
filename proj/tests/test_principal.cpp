// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "mhdc/errors.hpp"
#include "mhdc/principal.hpp"

using namespace mhdc;

namespace {

double rel(const SpectralField& a, const SpectralField& b) { return l2_norm(a - b) / l2_norm(b); }

BarField empty_bar(const TorusGrid& g, double N) {
  BarField b;
  b.N = N;
  for (SpectralField* f : {&b.Pu, &b.PB, &b.W, &b.H}) *f = SpectralField(g, Rank::Vector);
  b.quad_u = SpectralField(g, Rank::Tensor);
  b.quad_B = SpectralField(g, Rank::Tensor);
  return b;
}

// Pair with one Duhamel level built from random sources and two decay rates.
PrincipalPair synthetic_pair(const TorusGrid& g, std::mt19937_64& rng) {
  DuhamelField d;
  for (double mu : {6.0, 40.0}) {
    DuhamelTerm t;
    t.mu = mu;
    t.src_u = leray(random_field(g, Rank::Vector, 4, rng));
    t.src_B = leray(random_field(g, Rank::Vector, 4, rng));
    d.terms.push_back(t);
  }
  return PrincipalPair({empty_bar(g, 2.0), empty_bar(g, 4.0)}, {d});
}

// Exact Stokes and Euler solution: a decaying Beltrami shear with h = 0, f = 0.
TimeFields beltrami(const TorusGrid& g) {
  TimeFields f;
  f.v = [g](double t) {
    SpectralField v(g, Rank::Vector);
    const int kz[3] = {0, 0, 1};
    v.set_component(0, single_mode(g, Rank::Scalar, 0, kz, std::exp(-t), false));
    v.set_component(1, single_mode(g, Rank::Scalar, 0, kz, std::exp(-t), true));
    return v;
  };
  f.h = [g](double) { return SpectralField(g, Rank::Vector); };
  f.f = [g](double) { return ForcingPair{SpectralField(g, Rank::Tensor), SpectralField(g, Rank::Tensor)}; };
  return f;
}

}  // namespace

TEST(Duhamel, SyntheticLevelMatchesPerModeQuadrature) {
  const TorusGrid g(3, 16);
  std::mt19937_64 rng(11);
  const PrincipalPair pair = synthetic_pair(g, rng);
  const double t = 0.05;
  const SpectralField v = pair.v(0, t);
  const ModeTables& m = modes(g);
  const DuhamelField& d = pair.duhamel(0);
  double worst = 0.0, scale = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < g.spec_size(); ++i) {
      cplx expect = 0.0;
      for (const auto& term : d.terms) {
        auto f = [&](double s) { return std::exp(-m.k2[i] * (t - s) - term.mu * s); };
        expect -= term.src_u.comp(c)[i] *
                  boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, t, 8, 1e-15);
      }
      worst = std::max(worst, std::abs(v.comp(c)[i] - expect));
      scale = std::max(scale, std::abs(expect));
    }
  EXPECT_LE(worst / scale, 1e-12);
  EXPECT_EQ(l2_norm(pair.v(0, 0.0)), 0.0);
}

TEST(Duhamel, RateSolvesTheForcedHeatEquation) {
  const TorusGrid g(3, 16);
  std::mt19937_64 rng(12);
  const PrincipalPair pair = synthetic_pair(g, rng);
  const double t = 0.03, h = 1e-4;
  for (bool mag : {false, true}) {
    auto at = [&](double s) { return mag ? pair.h(0, s) : pair.v(0, s); };
    const SpectralField fd = (1.0 / (12.0 * h)) * (at(t - 2 * h) - 8.0 * at(t - h) + 8.0 * at(t + h) - at(t + 2 * h));
    EXPECT_LE(rel(fd, mag ? pair.dh(0, t) : pair.dv(0, t)), 1e-8);
  }
  EXPECT_EQ(pair.depth(), 1);
  EXPECT_LE(rel(pair.v(0.02), pair.v(0, 0.02)), 0.0);
}

TEST(Bars, DecayAndStress) {
  const TorusGrid g(3, 16);
  std::mt19937_64 rng(3);
  BarField b = empty_bar(g, 3.0);
  b.W = leray(random_field(g, Rank::Vector, 3, rng));
  b.Pu = random_field(g, Rank::Vector, 3, rng);
  const PrincipalPair pair({b}, {});
  EXPECT_LE(rel(pair.vbar(0, 0.1), std::exp(-0.9) * b.W), 1e-15);
  EXPECT_LE(rel(pair.Rbar(0, 0.1), -std::exp(-0.9) * op_newD(b.Pu)), 1e-15);
  EXPECT_THROW(pair.vbar(0, -1.0), NegativeTime);
}

TEST(Separation, TableMatchesClosedForm) {
  CascadeParams p;
  p.d = 2;
  p.A = 2;
  p.J_d = 4;
  p.k_max = 1;
  const ScalePlan plan = build_plan(p);
  const double t = plan.t.at(1);
  const SeparationTable tab = scale_separation_table(plan, 1, t);
  ASSERT_FALSE(tab.rows.empty());
  for (const auto& r : tab.rows) {
    const double s = r.Nj * r.Nj + r.Njp * r.Njp;
    EXPECT_NEAR(r.value, r.Nj * r.Njp * (-std::expm1(-s * t)) / s, 1e-12 * std::abs(r.value) + 1e-300);
    if (r.j == r.jp) EXPECT_NEAR(r.value, 0.5 * (-std::expm1(-2.0 * r.Nj * r.Nj * t)), 1e-12);
  }
}

TEST(Times, GeometricGrid) {
  const std::vector<double> ts = geometric_times(0.125, 1.0, 4);
  ASSERT_EQ(ts.size(), 13u);
  EXPECT_DOUBLE_EQ(ts.front(), 0.125);
  EXPECT_NEAR(ts.back(), 1.0, 1e-15);
  for (std::size_t i = 1; i < ts.size(); ++i) EXPECT_NEAR(ts[i] / ts[i - 1], std::exp2(0.25), 1e-14);
}

TEST(Residual, ExactSolutionConvergesAtFourthOrder) {
  const TorusGrid g(3, 16);
  const ResidualReport rep = forced_residual(beltrami(g), {0.1, 0.4}, {8, 16, 32});
  ASSERT_EQ(rep.order_u.size(), 2u);
  for (double o : rep.order_u) EXPECT_NEAR(o, 4.0, 0.2);
  EXPECT_LE(rep.levels.back().residual_u, 1e-6);
  EXPECT_EQ(rep.levels.back().residual_B, 0.0);
}

TEST(Residual, SamplesNeedThreeIncreasingTimes) {
  const TorusGrid g(3, 8);
  const TimeFields f = beltrami(g);
  EXPECT_THROW(residual_on_samples(f, {0.1, 0.2}), InsufficientSamples);
  EXPECT_THROW(residual_on_samples(f, {0.1, 0.3, 0.2}), InsufficientSamples);
  const auto r = residual_on_samples(f, {0.1, 0.1001, 0.1002, 0.1003, 0.1004});
  ASSERT_EQ(r.size(), 3u);
  for (const auto& [u, b] : r) EXPECT_LE(u, 1e-7);
  EXPECT_THROW(forced_residual(f, {}, {4}), InsufficientSamples);
}

TEST(Cascade, SmallBuildIsConsistent) {
  CascadeParams p;
  p.A = 2;
  p.k_max = 1;
  p.m_star = compute_m_star({default_lambda_u(), builtin_lambda_B(16)});
  const TorusGrid g(3, 64);
  const CascadeBuild cb = build_cascade(p, g, 1234, std::nullopt);
  EXPECT_EQ(cb.levels.size(), 2u);
  EXPECT_EQ(cb.pair.depth(), 1);
  const double t = cb.plan.t.at(1) * 4.0;
  EXPECT_LE(l2_norm(div(cb.pair.v(t))), 1e-10 * l2_norm(grad(cb.pair.v(t))));
  const double h = t * 1e-3;
  const SpectralField fd = (1.0 / (2.0 * h)) * (cb.pair.v(0, t + h) - cb.pair.v(0, t - h));
  EXPECT_LE(rel(fd, cb.pair.dv(0, t)), 1e-4);
}
