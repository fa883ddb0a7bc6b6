// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mhdc/corrector.hpp"
#include "mhdc/errors.hpp"

using namespace mhdc;

namespace {

// Brute-force Hoelder seminorm over offsets with every |component| <= L.
double holder_brute(const PhysicalField& f, double kappa, int L) {
  const int n = f.grid.n;
  const double h = f.grid.spacing();
  double best = 0.0;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        for (int dx = -L; dx <= L; ++dx)
          for (int dy = -L; dy <= L; ++dy)
            for (int dz = -L; dz <= L; ++dz) {
              if (dx == 0 && dy == 0 && dz == 0) continue;
              const std::size_t i = (static_cast<std::size_t>(x) * n + y) * n + z;
              const std::size_t j = (static_cast<std::size_t>((x + dx + n) % n) * n + (y + dy + n) % n) * n +
                                    (z + dz + n) % n;
              double s = 0.0;
              for (int c = 0; c < f.ncomp; ++c) {
                const double d = f.comp(c)[i] - f.comp(c)[j];
                s += d * d;
              }
              best = std::max(best, std::sqrt(s) / std::pow(h * std::sqrt(dx * dx + dy * dy + dz * dz), kappa));
            }
  return best;
}

TimeFields forced_rest(const TorusGrid& g, double amp) {
  std::mt19937_64 rng(21);
  const SpectralField fu = amp * random_field(g, Rank::Tensor, 3, rng);
  const SpectralField fb = amp * random_field(g, Rank::Tensor, 3, rng);
  TimeFields f;
  f.v = [g](double) { return SpectralField(g, Rank::Vector); };
  f.h = [g](double) { return SpectralField(g, Rank::Vector); };
  f.f = [fu, fb](double) { return ForcingPair{fu, fb}; };
  return f;
}

}  // namespace

TEST(Holder, MatchesBruteForce) {
  const TorusGrid g(3, 8);
  std::mt19937_64 rng(4);
  const PhysicalField p = to_physical(random_field(g, Rank::Vector, 2, rng));
  EXPECT_NEAR(holder_seminorm(p, 0.1, 2), holder_brute(p, 0.1, 2), 1e-13);
  EXPECT_NEAR(holder_seminorm(p, 0.5, 3), holder_brute(p, 0.5, 3), 1e-13);
}

TEST(XYNorm, ConstantField) {
  const TorusGrid g(3, 8);
  SpectralField c(g, Rank::Vector);
  c.comp(0)[0] = 3.0;
  const XYNorms n = xy_norm({0.25, 1.0}, {c, 0.5 * c}, 0.05, 0.1);
  EXPECT_NEAR(n.x_norm, std::max(std::pow(0.25, 0.475) * 3.0, 1.5), 1e-14);
  EXPECT_NEAR(n.y_norm, std::max(std::pow(0.25, 0.95) * 3.0, 1.5), 1e-14);
  EXPECT_THROW(xy_norm({0.0}, {c}, 0.05, 0.1), NegativeTime);
  EXPECT_THROW(xy_norm({1.0, 2.0}, {c}, 0.05, 0.1), Error);
}

TEST(XYNorm, SingleMode) {
  const TorusGrid g(3, 16);
  const int k[3] = {1, 0, 0};
  const SpectralField s = single_mode(g, Rank::Scalar, 0, k, 2.0, false);
  const NormPieces p = norm_pieces(s, 0.1);
  EXPECT_NEAR(p.sup, 2.0, 1e-13);
  EXPECT_NEAR(p.grad_sup, 2.0, 1e-13);
  EXPECT_GT(p.grad_holder, 0.0);
  const XYNorms n = xy_norm({1.0}, {s}, 0.05, 0.1);
  EXPECT_NEAR(n.x_norm, p.sup + p.grad_sup + p.grad_holder, 1e-12);
  EXPECT_NEAR(n.y_norm, n.x_norm, 1e-12);
}

TEST(Rescale, ScalesWavenumbersAndAmplitude) {
  const TorusGrid g(3, 32);
  const int k[3] = {1, 2, 0}, k3[3] = {3, 6, 0};
  const SpectralField s = single_mode(g, Rank::Scalar, 0, k, 1.0, false);
  const SpectralField r = rescale_field(s, 3);
  EXPECT_LE(l2_norm(r - single_mode(g, Rank::Scalar, 0, k3, 3.0, false)), 1e-15);
  EXPECT_THROW(rescale_field(s, 6), IncompatibleRescale);
  EXPECT_THROW(rescale_field(s, 0), IncompatibleRescale);
  EXPECT_EQ(l2_norm(rescale_field(s, 1) - s), 0.0);
}

TEST(Background, BeltramiShear) {
  const TorusGrid g(3, 16);
  const Background bg = background_from_name("beltrami", 0.3, 0.2);
  EXPECT_FALSE(bg.is_zero());
  const SpectralField U = bg.U(g, 0.5), H = bg.H(g, 0.5);
  EXPECT_EQ(l2_norm(div(U)), 0.0);
  EXPECT_EQ(l2_norm(div(H)), 0.0);
  EXPECT_NEAR(sup_norm(U), 0.3 * std::exp(-0.5), 1e-14);
  const SpectralField c = curl(U);
  EXPECT_TRUE(l2_norm(c - U) < 1e-14 || l2_norm(c + U) < 1e-14);
  EXPECT_LE(l2_norm(laplacian(U) + U), 1e-15);
  EXPECT_TRUE(background_from_name("zero", 1.0, 1.0).is_zero());
  EXPECT_THROW(background_from_name("swirl", 0.0, 0.0), ConfigError);
}

TEST(Picard, SmallForcingContracts) {
  const TorusGrid g(3, 16);
  CorrectorOptions o;
  o.t_start = 0.25;
  o.horizon = 0.5;
  o.steps_per_octave = 8;
  o.norm_per_octave = 1;
  o.iterates = 6;
  const PicardReport rep = picard_iterate(forced_rest(g, 0.05), g, o);
  ASSERT_EQ(rep.distances.size(), static_cast<std::size_t>(o.iterates) + 1);
  EXPECT_GT(rep.distances[0], 0.0);
  for (std::size_t i = 2; i < rep.ratios.size(); ++i) EXPECT_LE(rep.ratios[i], 0.5);
  EXPECT_LE(rep.fixed_point_residual, 1e-4);
  EXPECT_LE(rep.divergence, 1e-12);
  EXPECT_TRUE(rep.ratios_below_half);
}

TEST(Picard, UnforcedRestStaysAtRest) {
  const TorusGrid g(3, 8);
  CorrectorOptions o;
  o.t_start = 0.25;
  o.horizon = 0.5;
  o.steps_per_octave = 4;
  o.norm_per_octave = 1;
  o.iterates = 2;
  const PicardReport rep = picard_iterate(forced_rest(g, 0.0), g, o);
  for (double d : rep.distances) EXPECT_EQ(d, 0.0);
  for (const auto& w : rep.state.w) EXPECT_EQ(l2_norm(w), 0.0);
}

TEST(Assemble, RestSolutionHasNoResidual) {
  const TorusGrid g(3, 8);
  CorrectorOptions o;
  o.t_start = 0.25;
  o.horizon = 0.5;
  o.steps_per_octave = 4;
  o.norm_per_octave = 1;
  o.iterates = 1;
  const TimeFields f = forced_rest(g, 0.0);
  const PicardReport rep = picard_iterate(f, g, o);
  const AssembledSolution s = assemble_solution(f, rep.state, 1, o.background);
  EXPECT_EQ(s.times.size(), s.u.size());
  EXPECT_EQ(end_to_end_residual(s), 0.0);
  EXPECT_THROW(assemble_solution(f, rep.state, 0, o.background), IncompatibleRescale);
}
