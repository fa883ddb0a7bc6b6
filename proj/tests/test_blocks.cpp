// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mhdc/blocks.hpp"
#include "mhdc/errors.hpp"
#include "mhdc/geometry.hpp"

using namespace mhdc;

namespace {

std::vector<Frame> all_frames() {
  std::vector<Frame> v = default_lambda_u().frames;
  for (const auto& f : builtin_lambda_B(16).frames) v.push_back(f);
  return v;
}

}  // namespace

TEST(Cutoff, ProfileShape) {
  EXPECT_DOUBLE_EQ(cutoff_profile(0.0), 1.0);
  EXPECT_EQ(cutoff_profile(1.0), 0.0);
  EXPECT_EQ(cutoff_profile(3.0), 0.0);
  EXPECT_NEAR(cutoff_profile(0.5), std::exp(1.0 - 4.0 / 3.0), 1e-16);
  for (double s = 0.0; s < 0.99; s += 0.01) EXPECT_GT(cutoff_profile(s), cutoff_profile(s + 0.01));
}

TEST(Cutoff, Delta0IsLargestDyadicMeetingBothBounds) {
  const CutoffLayout lay = plan_cutoffs(all_frames(), 22, 1234);
  EXPECT_TRUE(lay.volume_ok);
  EXPECT_TRUE(lay.disjoint_ok);
  EXPECT_FALSE(lay.overridden);
  const double e = std::log2(lay.delta0);
  EXPECT_EQ(e, std::round(e));
  EXPECT_GT(lay.min_distance, 8.0 * lay.delta0);
  // Doubling breaks one of the bounds.
  double max_plen = 0.0;
  for (const auto& f : lay.families) max_plen = std::max(max_plen, f.plen);
  const double rho = 8.0 * lay.delta0;
  const bool vol = rho * rho * max_plen / (4.0 * std::numbers::pi) <= 1.0 / 220.0;
  EXPECT_FALSE(vol && lay.min_distance > 2.0 * rho);
}

TEST(Cutoff, OverrideAndSeedDeterminism) {
  const CutoffLayout a = plan_cutoffs(all_frames(), 22, 7, 1.0 / 64.0);
  const CutoffLayout b = plan_cutoffs(all_frames(), 22, 7, 1.0 / 64.0);
  EXPECT_TRUE(a.overridden);
  EXPECT_EQ(a.delta0, 1.0 / 64.0);
  ASSERT_EQ(a.families.size(), b.families.size());
  for (std::size_t i = 0; i < a.families.size(); ++i)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(a.families[i].offset[c], b.families[i].offset[c]);
  const CutoffLayout big = plan_cutoffs(all_frames(), 22, 7, 1.0);
  EXPECT_FALSE(big.volume_ok && big.disjoint_ok);
}

TEST(Cutoff, FamilyDistanceSymmetric) {
  const CutoffLayout lay = plan_cutoffs(all_frames(), 22, 3);
  for (std::size_t i = 0; i < lay.families.size(); ++i)
    for (std::size_t j = i + 1; j < lay.families.size(); ++j) {
      const double d = family_distance(lay.families[i], lay.families[j]);
      EXPECT_NEAR(d, family_distance(lay.families[j], lay.families[i]), 1e-12);
      EXPECT_GE(d, lay.min_distance - 1e-12);
    }
}

TEST(Cutoff, NormalizationOfSingleFamily) {
  const CutoffLayout lay = plan_cutoffs(all_frames(), 22, 1234);
  const TorusGrid g(3, 64);
  CutoffReport rep;
  const SpectralField phi = build_cylinder_cutoff(lay.families[0], 2, lay.delta0 * 8.0, g, {21, 21, 21}, &rep);
  EXPECT_THROW(build_cylinder_cutoff(lay.families[0], 2, lay.delta0, g, {31, 31, 31}), GridTooCoarse);
  EXPECT_GT(rep.modes, 0u);
  EXPECT_NEAR(rep.normalization, 1.0, 1e-2);
  EXPECT_GE(sup_norm(phi), 0.0);
}

TEST(Modulation, SinShiftMatchesNodalProduct) {
  const TorusGrid g(3, 16);
  std::mt19937_64 rng(5);
  const SpectralField f = random_field(g, Rank::Scalar, 2, rng);
  const IVec3 q{1, 2, 0};
  const PhysicalField pf = to_physical(f), pm = to_physical(modulate_sin(f, q));
  double worst = 0.0;
  const double h = g.spacing();
  for (int x = 0; x < 16; ++x)
    for (int y = 0; y < 16; ++y)
      for (int z = 0; z < 16; ++z) {
        const std::size_t i = (static_cast<std::size_t>(x) * 16 + y) * 16 + z;
        worst = std::max(worst, std::abs(pm.data[i] - pf.data[i] * std::sin(h * (x + 2.0 * y))));
      }
  EXPECT_LE(worst, 1e-13);
}

TEST(Mollify, GaussianMultiplier) {
  const TorusGrid g(3, 16);
  const int k[3] = {3, 0, 4};
  const SpectralField s = single_mode(g, Rank::Scalar, 0, k, 1.0, true);
  const SpectralField m = mollify(s, 0.1);
  EXPECT_NEAR(l2_norm(m) / l2_norm(s), std::exp(-0.5 * 0.25), 1e-14);
  const SpectralField t = truncate_box(s, {3, 3, 3});
  EXPECT_EQ(l2_norm(t), 0.0);
  EXPECT_EQ(l2_norm(truncate_box(s, {3, 0, 4}) - s), 0.0);
}

TEST(Amplitudes, IdentitiesAtFirstLevel) {
  CascadeParams p;
  p.A = 2;
  p.m_star = compute_m_star({default_lambda_u(), builtin_lambda_B(16)});
  const ScalePlan plan = build_plan(p);
  const TorusGrid g(3, 32);
  const BlockGeometry geo = make_block_geometry(default_lambda_u(), builtin_lambda_B(16), p.J_d, 1234, std::nullopt);
  const BlockLevel L0 = init_level0(geo.lambda_u, g);
  AmplitudeConstants constants;
  BuildOptions opt;
  opt.amplitudes_only = true;
  const BlockLevel L1 = next_level(L0, plan, constants, geo, {}, opt);
  for (double r : L1.diag.identity_residual) EXPECT_LE(r, 1e-8);
  EXPECT_GT(L1.diag.c, 0.0);
  EXPECT_LE(L1.diag.ball_u, 1.0);
  EXPECT_LE(L1.diag.ball_B, 1.0);
  EXPECT_EQ(L1.k, 1);
  EXPECT_EQ(L1.a_u.size(), L1.dirs_u.size());
  EXPECT_EQ(L1.a_B.size(), L1.dirs_B.size());
}
