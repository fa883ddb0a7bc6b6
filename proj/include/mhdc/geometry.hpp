// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <gmpxx.h>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace mhdc {

using QVec3 = std::array<mpq_class, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;
using QMatrix = std::vector<std::vector<mpq_class>>;

/// Rational orthonormal triad (eta, eta1, eta2).
struct Frame {
  QVec3 eta, eta1, eta2;
};

enum class FrameKind { LambdaU, LambdaB10, LambdaB16 };

std::string kind_name(FrameKind k);

/// Finite family of frames. For LambdaU an optional seed frame with an
/// integer axis is carried for the lowest cascade level; it takes no part in
/// the decomposition, span certificate or disjointness check.
struct FrameSet {
  FrameKind kind = FrameKind::LambdaU;
  std::vector<Frame> frames;
  std::optional<Frame> seed;
};

/// Symmetric 3x3 tensor stored as (xx, yy, zz, xy, xz, yz).
struct SymTensor {
  std::array<double, 6> e{};
  static SymTensor from_matrix(const Mat3& m);
  static SymTensor identity();
  Mat3 matrix() const;
  double trace() const { return e[0] + e[1] + e[2]; }
};

/// Skew 3x3 tensor stored as (G12, G13, G23).
struct SkewTensor {
  std::array<double, 3> e{};
  static SkewTensor from_matrix(const Mat3& m);
  Mat3 matrix() const;
};

/// Squared coefficients per frame and, for the coupled lemma, the pressure.
struct Decomposition {
  std::vector<double> gamma_sq;
  std::optional<double> pressure;
};

struct ValidationReport {
  FrameKind kind = FrameKind::LambdaU;
  bool orthonormal = true;
  bool pair_structure = true;
  bool basis = false;
  std::optional<mpq_class> determinant;
  bool positive_id_weights = false;
  std::vector<mpq_class> id_weights;
  bool disjoint = true;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Coefficients as an affine map of input coordinates: gamma = base + L x.
/// The coordinate systems are (R - Id) in (xx, yy, zz, xy, xz, yz) for the
/// symmetric lemma, (xx, yy, xy, xz, yz) for traceless input, (G12, G13, G23)
/// for skew input and (M11, M22, M12, M13, M23, N12, N13, N23) for the coupled
/// lemma. The norm on coordinates is the Frobenius norm of the tensor.
struct AffineMap {
  int nout = 0;
  int nin = 0;
  std::vector<double> base;
  std::vector<double> L;  ///< row-major nout x nin
  double radius = 0.0;    ///< certified radius in Frobenius norm
};

FrameSet builtin_lambda_B(int kind);
FrameSet default_lambda_u();

ValidationReport validate_frames(const FrameSet& fs);

Decomposition decompose_symmetric(const SymTensor& R, const FrameSet& fs);
Decomposition decompose_traceless(const SymTensor& R, const FrameSet& fs);
Decomposition decompose_skew(const SkewTensor& G, const FrameSet& fs);
Decomposition decompose_coupled(const SymTensor& R, const SkewTensor& G, const FrameSet& fs);

double certify_radius(const FrameSet& fs);

AffineMap symmetric_map(const FrameSet& fs);
AffineMap traceless_map(const FrameSet& fs);
AffineMap skew_map(const FrameSet& fs);
AffineMap coupled_map(const FrameSet& fs);

/// Sum_i gamma_i eta1 (x) eta1.
Mat3 reconstruct_symmetric(const Decomposition& dec, const FrameSet& fs);
/// Sum_i gamma_i (eta1 (x) eta1 - eta2 (x) eta2).
Mat3 reconstruct_traceless(const Decomposition& dec, const FrameSet& fs);
/// Sum_i gamma_i (eta1 (x) eta2 - eta2 (x) eta1).
Mat3 reconstruct_skew(const Decomposition& dec, const FrameSet& fs);

// Frobenius norms of coordinates.
double frobenius(const Mat3& m);
Mat3 identity3();

// Frame helpers.
std::array<double, 3> to_double(const QVec3& v);
mpq_class dot(const QVec3& a, const QVec3& b);
/// Coupled generator coordinates W(eta) = (T(eta), S(eta)) in the 8 coupled coordinates.
std::vector<mpq_class> coupled_generator(const Frame& f);
/// Exact determinant by fraction-carrying Gaussian elimination.
mpq_class exact_det(QMatrix m);
/// Exact inverse; throws if singular.
QMatrix exact_inverse(QMatrix m);
/// Least common multiple of all eta-coordinate denominators (used for m_*).
long eta_denominator_lcm(const FrameSet& fs, bool include_seed);

nlohmann::json frames_to_json(const FrameSet& fs);
FrameSet frames_from_json(const nlohmann::json& j);

}  // namespace mhdc
