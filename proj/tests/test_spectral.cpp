// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <random>

#include "mhdc/errors.hpp"
#include "mhdc/spectral.hpp"

using namespace mhdc;

namespace {

double rel(const SpectralField& a, const SpectralField& b) {
  const double n = l2_norm(b);
  return n > 0.0 ? l2_norm(a - b) / n : l2_norm(a - b);
}

double quad(double lambda, double mu, double t) {
  auto f = [&](double s) { return std::exp(-lambda * (t - s) - mu * s); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, t, 8, 1e-15);
}

struct Fields : ::testing::Test {
  TorusGrid g{3, 32};
  std::mt19937_64 rng{42};
  SpectralField f, T;
  void SetUp() override {
    f = random_field(g, Rank::Vector, 10, rng);
    T = random_field(g, Rank::Tensor, 10, rng);
  }
};

}  // namespace

TEST(Grid, BandAndSizes) {
  const TorusGrid g(3, 32);
  EXPECT_EQ(g.band(), 10);
  EXPECT_EQ(g.real_size(), 32u * 32u * 32u);
  EXPECT_EQ(g.spec_size(), 32u * 32u * 17u);
}

TEST(Heat, SingleModeDecays) {
  const TorusGrid g(3, 16);
  const int k[3] = {1, 2, 0};
  const SpectralField s = single_mode(g, Rank::Scalar, 0, k, 1.0, false);
  EXPECT_LE(rel(heat(s, 0.3), std::exp(-5.0 * 0.3) * s), 1e-15);
  EXPECT_LE(rel(heat(s, 0.0), s), 0.0);
  EXPECT_THROW(heat(s, -1.0), NegativeTime);
}

TEST_F(Fields, HeatMatchesPerModeOracle) {
  const double t = 0.013;
  const SpectralField h = heat(f, t);
  const ModeTables& m = modes(g);
  double worst = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < g.spec_size(); ++i)
      worst = std::max(worst, std::abs(h.comp(c)[i] - f.comp(c)[i] * std::exp(-m.k2[i] * t)));
  EXPECT_LE(worst / max_coefficient(f), 1e-14);
  EXPECT_LE(rel(heat(heat(f, 0.2), 0.3), heat(f, 0.5)), 1e-13);
}

TEST_F(Fields, LerayProperties) {
  const SpectralField P = leray(f);
  EXPECT_LE(l2_norm(div(P)) / l2_norm(f), 1e-13);
  EXPECT_LE(rel(leray(P), P), 1e-13);
  const SpectralField q = random_field(g, Rank::Scalar, 10, rng);
  EXPECT_LE(l2_norm(p_nonzero(leray(grad(q)))) / l2_norm(grad(q)), 1e-13);
  const SpectralField h = random_field(g, Rank::Vector, 10, rng);
  EXPECT_NEAR(inner(P, h), inner(f, leray(h)), 1e-13 * l2_norm(f) * l2_norm(h));
}

TEST_F(Fields, EightIdentities) {
  const SpectralField P = leray(f);
  EXPECT_LE(rel(div(op_D(f)), laplacian(P)), 1e-12);
  EXPECT_LE(rel(div(op_newD(f)), laplacian(f)), 1e-12);
  EXPECT_LE(rel(div(op_Ds(f)), laplacian(f)), 1e-12);
  EXPECT_LE(rel(div(op_calR(f)), p_nonzero(f)), 1e-12);
  EXPECT_LE(rel(op_Q(T), op_calR(leray(div(T)))), 1e-12);
  EXPECT_LE(rel(op_Q(op_D(f)), 2.0 * sym_grad(P)), 1e-12);
  EXPECT_LE(rel(op_Qs(T), op_calRs(leray(div(T)))), 1e-12);
  EXPECT_LE(rel(op_Qs(op_Ds(f)), grad(P) - transpose(grad(P))), 1e-12);
}

TEST(Operators, ConstantAndDivergenceFree) {
  const TorusGrid g(3, 16);
  SpectralField c(g, Rank::Vector);
  c.comp(0)[0] = 2.0;
  c.comp(2)[0] = -1.0;
  for (auto op : {op_D, op_newD, op_Ds}) EXPECT_EQ(max_coefficient(op(c)), 0.0);
  const int k[3] = {0, 0, 2};
  const SpectralField s = single_mode(g, Rank::Vector, 0, k, 1.0, false);
  EXPECT_EQ(l2_norm(div(s)), 0.0);
  EXPECT_LE(rel(op_D(s), 2.0 * sym_grad(s)), 1e-15);
  EXPECT_LE(rel(op_newD(s), 2.0 * sym_grad(s)), 1e-15);
}

TEST(Operators, RealFieldsStayReal) {
  const TorusGrid g(3, 16);
  std::mt19937_64 rng(9);
  const SpectralField f = random_field(g, Rank::Vector, 4, rng);
  for (const SpectralField& x : {leray(f), op_calR(f), curl(f), outer(f, f)}) {
    const PhysicalField p = to_physical(x);
    EXPECT_LE(rel(to_spectral(p, false), x), 1e-14);
  }
}

TEST(LittlewoodPaley, BumpCentreAndPartition) {
  EXPECT_DOUBLE_EQ(lp_bump(1.0), 1.0);
  EXPECT_EQ(lp_bump(0.66), 0.0);
  EXPECT_EQ(lp_bump(1.5), 0.0);
  for (double r = 0.75; r < 100.0; r *= 1.0137) {
    double s = 0.0;
    for (double N = 0.5; N < 1024.0; N *= 2.0) s += lp_bump(r / N);
    EXPECT_NEAR(s, 1.0, 1e-12) << r;
  }
  const TorusGrid g(3, 32);
  const int k[3] = {4, 0, 0};
  const SpectralField s = single_mode(g, Rank::Scalar, 0, k, 1.0, true);
  EXPECT_LE(rel(littlewood_paley(s, 4.0), s), 1e-15);
  EXPECT_EQ(l2_norm(low_pass(s, 4.0)), 0.0);
  EXPECT_LE(rel(low_pass(s, 4.5), s), 0.0);
}

TEST(LittlewoodPaley, SumRecoversField) {
  const TorusGrid g(3, 32);
  std::mt19937_64 rng(4);
  const SpectralField f = random_field(g, Rank::Scalar, 10, rng);
  SpectralField s(g, Rank::Scalar);
  for (double N = 1.0; N <= 32.0; N *= 2.0) s += littlewood_paley(f, N);
  EXPECT_LE(rel(s, p_nonzero(f)), 1e-12);
}

TEST(Duhamel, Branches) {
  EXPECT_DOUBLE_EQ(duhamel_coefficient(3.0, 3.0, 0.5), 0.5 * std::exp(-1.5));
  EXPECT_NEAR(duhamel_coefficient(4.0, 0.0, 0.25), (1.0 - std::exp(-1.0)) / 4.0, 1e-16);
  EXPECT_NEAR(duhamel_coefficient(2.0, 2.0 * (1.0 + 1e-10), 0.7), 0.7 * std::exp(-1.4) * (1.0 - 2e-10 * 0.35), 1e-16);
}

TEST(Duhamel, MatchesQuadrature) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double lambda = std::floor(300.0 * u(rng));
    const double t = std::exp(std::log(1e-3) * u(rng));
    double mu = 600.0 * u(rng);
    if (i % 3 == 1) mu = lambda;
    if (i % 3 == 2) mu = lambda * (1.0 + 2e-9 * (u(rng) - 0.5));
    const double q = quad(lambda, mu, t);
    EXPECT_LE(std::abs(duhamel_coefficient(lambda, mu, t) - q) / q, 1e-12) << lambda << " " << mu << " " << t;
  }
}

TEST(Duhamel, FieldAppliesCoefficientPerMode) {
  const TorusGrid g(3, 16);
  std::mt19937_64 rng(2);
  const SpectralField f = random_field(g, Rank::Vector, 5, rng);
  const SpectralField d = duhamel_separable(f, 11.0, 0.2);
  const ModeTables& m = modes(g);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < g.spec_size(); ++i)
      EXPECT_LE(std::abs(d.comp(c)[i] - f.comp(c)[i] * quad(m.k2[i], 11.0, 0.2)), 1e-12 * std::abs(f.comp(c)[i]) + 1e-300);
}

TEST(Products, DealiasedProductOfModes) {
  const TorusGrid g(3, 16);
  const int a[3] = {1, 0, 0}, b[3] = {0, 2, 0};
  const SpectralField u = single_mode(g, Rank::Scalar, 0, a, 1.0, false);
  const SpectralField v = single_mode(g, Rank::Scalar, 0, b, 1.0, false);
  const PhysicalField pu = to_physical(u), pv = to_physical(v), pw = to_physical(multiply(u, v));
  double worst = 0.0;
  for (std::size_t i = 0; i < g.real_size(); ++i) worst = std::max(worst, std::abs(pw.data[i] - pu.data[i] * pv.data[i]));
  EXPECT_LE(worst, 1e-14);
}

TEST(Snapshot, RoundTrip) {
  const TorusGrid g(3, 8);
  std::mt19937_64 rng(1);
  const SpectralField f = random_field(g, Rank::Tensor, 2, rng);
  const std::string path = ::testing::TempDir() + "snap.bin";
  write_snapshot(path, f);
  const SpectralField back = read_snapshot(path);
  EXPECT_EQ(back.rank(), f.rank());
  EXPECT_LE(rel(back, f), 0.0);
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  char magic[4];
  ASSERT_EQ(std::fread(magic, 1, 4, fp), 4u);
  std::fclose(fp);
  EXPECT_EQ(std::string(magic, 4), "MHDC");
}
