// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "mhdc/errors.hpp"
#include "mhdc/geometry.hpp"

using namespace mhdc;

namespace {

QVec3 q(const char* a, const char* b, const char* c) { return {mpq_class(a), mpq_class(b), mpq_class(c)}; }

// Determinant by the Leibniz permutation expansion, independent of the
// elimination used by exact_det.
mpq_class leibniz_det(const QMatrix& m) {
  const std::size_t n = m.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  mpq_class total = 0;
  do {
    int inversions = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (perm[i] > perm[j]) ++inversions;
    mpq_class term = inversions % 2 ? -1 : 1;
    for (std::size_t i = 0; i < n && term != 0; ++i) term *= m[i][perm[i]];
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

Mat3 outer3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  Mat3 m{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m[r][c] = a[r] * b[c];
  return m;
}

double max_abs_diff(const Mat3& a, const Mat3& b) {
  double m = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(a[r][c] - b[r][c]));
  return m;
}

}  // namespace

TEST(Frames, Lambda10ThirdFrame) {
  const FrameSet fs = builtin_lambda_B(10);
  ASSERT_EQ(fs.frames.size(), 10u);
  EXPECT_EQ(fs.frames[2].eta, q("3/5", "4/5", "0"));
  EXPECT_EQ(fs.frames[2].eta1, q("-4/5", "3/5", "0"));
  EXPECT_EQ(fs.frames[2].eta2, q("0", "0", "1"));
}

TEST(Frames, Lambda16FourthFrameAndPairing) {
  const FrameSet fs = builtin_lambda_B(16);
  ASSERT_EQ(fs.frames.size(), 16u);
  const Frame& f4 = fs.frames[3];
  EXPECT_EQ(f4.eta, q("2/3", "1/3", "-2/3"));
  EXPECT_EQ(f4.eta1, q("1/3", "2/3", "2/3"));
  EXPECT_EQ(f4.eta2, q("2/3", "-2/3", "1/3"));
  const Frame& f12 = fs.frames[11];
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(f12.eta[i], -f4.eta[i]);
    EXPECT_EQ(f12.eta1[i], f4.eta2[i]);
    EXPECT_EQ(f12.eta2[i], f4.eta1[i]);
  }
}

TEST(Frames, Lambda16DeterminantIsExact) {
  const ValidationReport r = validate_frames(builtin_lambda_B(16));
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.orthonormal);
  ASSERT_TRUE(r.determinant.has_value());
  EXPECT_EQ(*r.determinant, mpq_class(64, 81));
}

TEST(Frames, LeibnizOracleAgreesWithElimination) {
  const FrameSet fs = builtin_lambda_B(16);
  QMatrix m(8, std::vector<mpq_class>(8));
  for (std::size_t c = 0; c < 8; ++c) {
    const auto col = coupled_generator(fs.frames[c]);
    for (std::size_t r = 0; r < 8; ++r) m[r][c] = col[r];
  }
  const mpq_class lb = leibniz_det(m);
  EXPECT_EQ(lb * lb, mpq_class(64, 81) * mpq_class(64, 81));
  EXPECT_EQ(exact_det(m), lb);
}

TEST(Frames, Lambda10AndLambdaUValidate) {
  EXPECT_TRUE(validate_frames(builtin_lambda_B(10)).ok());
  const ValidationReport u = validate_frames(default_lambda_u());
  EXPECT_TRUE(u.ok());
  EXPECT_TRUE(u.basis);
  EXPECT_TRUE(u.positive_id_weights);
  for (const auto& w : u.id_weights) EXPECT_GT(w, 0);
}

TEST(Frames, BrokenNormIsFlagged) {
  FrameSet fs = builtin_lambda_B(10);
  for (auto& c : fs.frames[0].eta1) c *= 2;
  const ValidationReport r = validate_frames(fs);
  EXPECT_FALSE(r.orthonormal);
  EXPECT_FALSE(r.ok());
}

TEST(Frames, LambdaUIsDisjointFromLambdaB) {
  for (int kind : {10, 16}) {
    const FrameSet b = builtin_lambda_B(kind);
    for (const auto& fu : default_lambda_u().frames)
      for (const auto& fb : b.frames) EXPECT_NE(fu.eta, fb.eta);
  }
  EXPECT_TRUE(default_lambda_u().seed.has_value());
}

TEST(Frames, JsonRoundTripIsLossless) {
  for (const FrameSet& fs : {builtin_lambda_B(10), builtin_lambda_B(16), default_lambda_u()}) {
    const FrameSet back = frames_from_json(frames_to_json(fs));
    ASSERT_EQ(back.frames.size(), fs.frames.size());
    for (std::size_t i = 0; i < fs.frames.size(); ++i) {
      EXPECT_EQ(back.frames[i].eta, fs.frames[i].eta);
      EXPECT_EQ(back.frames[i].eta1, fs.frames[i].eta1);
      EXPECT_EQ(back.frames[i].eta2, fs.frames[i].eta2);
    }
    EXPECT_EQ(back.kind, fs.kind);
  }
  EXPECT_EQ(frames_to_json(builtin_lambda_B(16)).dump().find("2/3") != std::string::npos, true);
}

TEST(Symmetric, IdentityUsesTheIdWeights) {
  const FrameSet fs = default_lambda_u();
  const ValidationReport v = validate_frames(fs);
  const Decomposition d = decompose_symmetric(SymTensor::identity(), fs);
  ASSERT_EQ(d.gamma_sq.size(), v.id_weights.size());
  for (std::size_t i = 0; i < d.gamma_sq.size(); ++i) EXPECT_NEAR(d.gamma_sq[i], v.id_weights[i].get_d(), 1e-14);
  EXPECT_LE(max_abs_diff(reconstruct_symmetric(d, fs), identity3()), 1e-14);
}

TEST(Symmetric, SmallShearReconstructs) {
  const FrameSet fs = default_lambda_u();
  Mat3 R = identity3();
  R[0][1] = R[1][0] = 0.01;
  const Decomposition d = decompose_symmetric(SymTensor::from_matrix(R), fs);
  EXPECT_LE(max_abs_diff(reconstruct_symmetric(d, fs), R), 1e-12);
}

TEST(Symmetric, FarOutsideThrows) {
  Mat3 R = identity3();
  R[0][1] = R[1][0] = 10.0 / std::sqrt(2.0);
  EXPECT_THROW(decompose_symmetric(SymTensor::from_matrix(R), default_lambda_u()), OutOfBall);
}

TEST(Symmetric, RandomInsideBallReconstructs) {
  const FrameSet fs = default_lambda_u();
  const double r = certify_radius(fs);
  ASSERT_GT(r, 0.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int s = 0; s < 1000; ++s) {
    Mat3 X{};
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) X[a][b] = X[b][a] = g(rng);
    const double scale = r / frobenius(X);
    Mat3 R = identity3();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) R[a][b] += scale * X[a][b];
    const Decomposition d = decompose_symmetric(SymTensor::from_matrix(R), fs);
    for (double x : d.gamma_sq) EXPECT_GE(x, 0.01 - 1e-12);
    EXPECT_LE(max_abs_diff(reconstruct_symmetric(d, fs), R), 1e-12);
  }
}

TEST(Traceless, ZeroGivesOnes) {
  const Decomposition d = decompose_traceless(SymTensor{}, builtin_lambda_B(10));
  for (double x : d.gamma_sq) EXPECT_DOUBLE_EQ(x, 1.0);
}

TEST(Traceless, FirstGeneratorShiftsItsPair) {
  const FrameSet fs = builtin_lambda_B(10);
  const auto a = to_double(fs.frames[0].eta1), b = to_double(fs.frames[0].eta2);
  Mat3 R{};
  const Mat3 aa = outer3(a, a), bb = outer3(b, b);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R[r][c] = 0.1 * (aa[r][c] - bb[r][c]);
  const Decomposition d = decompose_traceless(SymTensor::from_matrix(R), fs);
  EXPECT_NEAR(d.gamma_sq[0], 1.05, 1e-14);
  EXPECT_NEAR(d.gamma_sq[5], 0.95, 1e-14);
  for (int i : {1, 2, 3, 4, 6, 7, 8, 9}) EXPECT_NEAR(d.gamma_sq[i], 1.0, 1e-14);
  EXPECT_LE(max_abs_diff(reconstruct_traceless(d, fs), R), 1e-14);
}

TEST(Traceless, IdentityIsRejected) {
  EXPECT_THROW(decompose_traceless(SymTensor::identity(), builtin_lambda_B(10)), NotTraceless);
}

TEST(Skew, FixedIndicesStayOne) {
  const FrameSet fs = builtin_lambda_B(10);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  const double r = certify_radius(fs);
  for (int s = 0; s < 200; ++s) {
    SkewTensor G;
    for (auto& e : G.e) e = g(rng);
    const double n = frobenius(G.matrix());
    for (auto& e : G.e) e *= 0.9 * r / n;
    const Decomposition d = decompose_skew(G, fs);
    for (int i : {3, 4, 8, 9}) EXPECT_EQ(d.gamma_sq[i], 1.0);
    EXPECT_LE(max_abs_diff(reconstruct_skew(d, fs), G.matrix()), 1e-12);
  }
}

TEST(Skew, FirstGeneratorShiftsItsPair) {
  const FrameSet fs = builtin_lambda_B(10);
  const auto a = to_double(fs.frames[0].eta1), b = to_double(fs.frames[0].eta2);
  Mat3 M{};
  const Mat3 ab = outer3(a, b), ba = outer3(b, a);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) M[r][c] = 0.1 * (ab[r][c] - ba[r][c]);
  const Decomposition d = decompose_skew(SkewTensor::from_matrix(M), fs);
  EXPECT_NEAR(d.gamma_sq[0], 1.05, 1e-14);
  EXPECT_NEAR(d.gamma_sq[5], 0.95, 1e-14);
}

TEST(Coupled, ZeroAndIdentity) {
  const FrameSet fs = builtin_lambda_B(16);
  const Decomposition z = decompose_coupled(SymTensor{}, SkewTensor{}, fs);
  for (double x : z.gamma_sq) EXPECT_DOUBLE_EQ(x, 1.0);
  EXPECT_DOUBLE_EQ(*z.pressure, 0.0);
  const Decomposition id = decompose_coupled(SymTensor::identity(), SkewTensor{}, fs);
  EXPECT_DOUBLE_EQ(*id.pressure, 1.0);
  for (double x : id.gamma_sq) EXPECT_DOUBLE_EQ(x, 1.0);
  EXPECT_LE(frobenius(reconstruct_traceless(id, fs)), 1e-15);
  EXPECT_LE(frobenius(reconstruct_skew(id, fs)), 1e-15);
}

TEST(Coupled, SharedCoefficientsReconstructBoth) {
  const FrameSet fs = builtin_lambda_B(16);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int s = 0; s < 1000; ++s) {
    SymTensor R;
    SkewTensor G;
    for (auto& e : R.e) e = g(rng);
    for (auto& e : G.e) e = g(rng);
    Mat3 Rm = R.matrix();
    const double p = R.trace() / 3.0;
    for (int a = 0; a < 3; ++a) Rm[a][a] -= p;
    const double n = std::hypot(frobenius(Rm), frobenius(G.matrix()));
    Mat3 Gm = G.matrix();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        Rm[a][b] *= 0.05 / n;
        Gm[a][b] *= 0.05 / n;
      }
    for (int a = 0; a < 3; ++a) Rm[a][a] += p;
    const Decomposition d = decompose_coupled(SymTensor::from_matrix(Rm), SkewTensor::from_matrix(Gm), fs);
    Mat3 back = reconstruct_traceless(d, fs);
    for (int a = 0; a < 3; ++a) back[a][a] += *d.pressure;
    EXPECT_LE(max_abs_diff(back, Rm), 1e-12);
    EXPECT_LE(max_abs_diff(reconstruct_skew(d, fs), Gm), 1e-12);
  }
}

TEST(Coupled, PairedFramesSwapUnderNegation) {
  const FrameSet fs = builtin_lambda_B(16);
  SymTensor R;
  R.e = {0.01, -0.02, 0.01, 0.005, -0.003, 0.002};
  SkewTensor G;
  G.e = {0.004, -0.001, 0.002};
  SymTensor Rn;
  SkewTensor Gn;
  for (int i = 0; i < 6; ++i) Rn.e[i] = -R.e[i];
  for (int i = 0; i < 3; ++i) Gn.e[i] = -G.e[i];
  const Decomposition a = decompose_coupled(R, G, fs), b = decompose_coupled(Rn, Gn, fs);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(a.gamma_sq[i], b.gamma_sq[i + 8], 1e-15);
}

TEST(Coupled, CertifiedRadiusKeepsPositivity) {
  const FrameSet fs = builtin_lambda_B(16);
  const double r = certify_radius(fs);
  ASSERT_GT(r, 0.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int s = 0; s < 1000; ++s) {
    Mat3 T{};
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) T[a][b] = T[b][a] = g(rng);
    const double tr = (T[0][0] + T[1][1] + T[2][2]) / 3.0;
    for (int a = 0; a < 3; ++a) T[a][a] -= tr;
    SkewTensor G;
    for (auto& e : G.e) e = g(rng);
    Mat3 Gm = G.matrix();
    const double n = std::hypot(frobenius(T), frobenius(Gm));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        T[a][b] *= r / n;
        Gm[a][b] *= r / n;
      }
    const Decomposition d = decompose_coupled(SymTensor::from_matrix(T), SkewTensor::from_matrix(Gm), fs);
    for (double x : d.gamma_sq) EXPECT_GE(x, 0.01 - 1e-12);
  }
}
