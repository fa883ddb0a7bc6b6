// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mhdc/geometry.hpp"
#include "mhdc/scales.hpp"
#include "mhdc/spectral.hpp"

namespace mhdc {

using Vec3 = std::array<double, 3>;
using IVec3 = std::array<long, 3>;

/// Smallest integer vector parallel to eta with the same orientation.
IVec3 primitive_direction(const QVec3& eta);

/// One periodic family of cylinders around the lines y in o + R p + 2 pi Z^3,
/// written in the scaled variable y = M x. Everything here is independent of M.
struct CylinderFamily {
  Frame frame;
  IVec3 p{};     ///< primitive axis
  double plen = 0.0;
  IVec3 m1{}, m2{};  ///< basis of the integer modes orthogonal to p
  Vec3 d1{}, d2{};   ///< dual basis in the plane orthogonal to p
  Vec3 offset{};     ///< o, in y units

  /// Distance in y units from y to the nearest axis line of the family.
  double distance(const Vec3& y) const;
  /// Fraction of the torus covered by cylinders of radius rho (y units).
  double volume_fraction(double rho) const { return rho * rho * plen / (4.0 * 3.14159265358979323846); }
  /// Shortest distance between two distinct axis lines of the family.
  double self_spacing() const;
};

CylinderFamily make_family(const Frame& f, const Vec3& offset);

/// Minimal distance in y units between the axis lines of two families.
double family_distance(const CylinderFamily& a, const CylinderFamily& b);

struct CutoffLayout {
  std::vector<CylinderFamily> families;
  double delta0 = 0.0;           ///< value in use
  double delta0_computed = 0.0;  ///< largest dyadic value meeting both bounds
  bool overridden = false;
  double min_distance = 0.0;     ///< over all pairs and self spacings, y units
  double max_volume_fraction = 0.0;  ///< of C(4 delta0) over families
  bool volume_ok = false;
  bool disjoint_ok = false;
};

/// Chooses family offsets by a seeded search maximising the minimal pairwise
/// distance, then computes delta0.
CutoffLayout plan_cutoffs(const std::vector<Frame>& frames, int J_d, std::uint64_t seed,
                          std::optional<double> delta0_override = std::nullopt);

struct CutoffReport {
  double normalization = 0.0;  ///< mean of phi^2 sin^2(N eta.x)
  double axis_derivative = 0.0;  ///< sup |eta . grad phi|
  double leakage = 0.0;        ///< sup |phi| outside the cylinders, relative to sup |phi|
  double volume_fraction = 0.0;
  std::vector<double> grad_ratios;  ///< sup |(-Delta)^{n/2} phi| / M^n, n = 0..4
  std::size_t modes = 0;
};

/// Radial profile exp(1 - 1/(1 - s^2)) on s < 1.
double cutoff_profile(double s);

/// Smooth 2 pi/M periodic transverse bump of radius delta0/M around the family
/// axes, restricted to the modes with |k_i| <= caps[i]. Normalised so that
/// the mean of phi^2 sin^2(N eta.x) is one.
SpectralField build_cylinder_cutoff(const CylinderFamily& fam, long M, double delta0, const TorusGrid& g,
                                    const std::array<int, 3>& caps, CutoffReport* rep = nullptr);
SpectralField build_cylinder_cutoff(const Frame& frame, long M, double delta0, const TorusGrid& g,
                                    CutoffReport* rep = nullptr);

/// Geometry of one built level k >= 1 as needed by the support sets.
struct LevelSupport {
  long M = 1;
  const CutoffLayout* layout = nullptr;
};

/// Nodal indicator-type fields: 1 inside the union over families of C(rho delta0).
std::vector<double> union_distance_ratio(const LevelSupport& s, const TorusGrid& g);

/// chi_k: 1 on Omega_{k-1}, 0 outside Omega~_{k-1}. levels[i] describes level i+1.
SpectralField build_chi(int k, const std::vector<LevelSupport>& levels, const TorusGrid& g,
                        std::vector<double>* nodal = nullptr);
/// Nodal indicator of Omega_k (rho_in) or Omega~_k (rho_out).
std::vector<std::uint8_t> omega_indicator(int k, const std::vector<LevelSupport>& levels, const TorusGrid& g,
                                          bool tilde);

/// Gaussian spectral mollifier exp(-(|xi| ell)^2 / 2).
SpectralField mollify(const SpectralField& f, double ell);
/// f(x) sin(q.x) by an exact shift of the spectrum.
SpectralField modulate_sin(const SpectralField& f, const IVec3& q);
/// Keeps |k_i| <= caps[i].
SpectralField truncate_box(const SpectralField& f, const std::array<int, 3>& caps);

// ----------------------------------------------------------------------------

struct AmplitudeConstants {
  double c = 1.0;
  double c0 = 0.0;        ///< symmetric certified radius
  double eps_star = 0.0;  ///< coupled certified radius
  int halvings = 0;
};

struct LevelDiagnostics {
  double c = 1.0;
  int halvings = 0;
  double ball_u = 0.0;  ///< max pointwise |c S_u| / c0
  double ball_B = 0.0;  ///< max pointwise |(c S_sym)_0, c S_skw| / eps_star
  double min_gamma_u = 0.0;  ///< min over nodes of a^2 c / chi^2
  double min_gamma_B = 0.0;
  std::array<double, 3> identity_residual{};  ///< the three amplitude identities
  double chi_min = 1.0;
  double cutoff_normalization_error = 0.0;
  double cutoff_axis_derivative = 0.0;
  double cutoff_leakage = 0.0;
  double psi_leakage = 0.0;    ///< sup |psi| outside Omega_k relative to sup |psi|
  double pair_overlap = 0.0;   ///< sup over nodes of |s_i s_j|, i != j, relative
  double amplitude_support_leak = 0.0;  ///< sup |a| outside Omega~_{k-1}
  double omega_volume = 1.0;
  std::vector<std::array<double, 5>> psi_ratios;  ///< per j: sup|(-Delta)^{n/2} psi| N^{2-n}
  std::vector<std::array<double, 5>> amp_ratios;  ///< per j: sup|(-Delta)^{n/2} a| / N_{J,k-1}^n
};

/// Building blocks of one level. Potentials are stored through their sums
/// P_u = sum N psi_u, P_c = sum N psi_c, P_B = sum N psi_B; per direction the
/// scalar profile s_j with psi_j = N^{-2} s_j e_j (e_j = eta1 or eta2) is kept
/// on request.
struct BlockLevel {
  int k = 0;
  double N = 1.0;
  long M = 1;
  double ell = 0.0;
  TorusGrid grid;
  std::vector<Frame> dirs_u, dirs_B;
  std::vector<SpectralField> a_u, a_B;
  std::vector<SpectralField> prof_u, prof_B;
  SpectralField sum_u, sum_c, sum_B;
  SpectralField amp_u, amp_c, amp_s;  ///< sum a^2 eta1 eta1, sum a^2 T, sum a^2 S
  SpectralField chi;
  std::optional<CutoffLayout> layout;
  LevelDiagnostics diag;
};

struct BlockGeometry {
  FrameSet lambda_u;
  FrameSet lambda_b;
  AffineMap sym;
  AffineMap coupled;
  CutoffLayout layout;
};

BlockGeometry make_block_geometry(const FrameSet& lambda_u, const FrameSet& lambda_b, int J_d,
                                  std::uint64_t seed, std::optional<double> delta0_override);

struct BuildOptions {
  bool keep_profiles = false;
  bool diagnostics = true;
  /// Stops after the amplitude tensors; profiles and sums stay empty and the
  /// band check is skipped.
  bool amplitudes_only = false;
};

/// Level 0: a single velocity direction (the seed frame) with N = 1, a = 1.
BlockLevel init_level0(const FrameSet& lambda_u, const TorusGrid& g);

/// Builds level prev.k + 1. `history` lists the supports of levels 1..prev.k.
BlockLevel next_level(const BlockLevel& prev, const ScalePlan& plan, AmplitudeConstants& constants,
                      const BlockGeometry& geo, const std::vector<LevelSupport>& history,
                      const BuildOptions& opt = {});

/// Amplitude identity residuals (relative L2) for amplitude tensors built at
/// level k+1 from the potentials of level k.
std::array<double, 3> identity_residuals(const BlockLevel& prev, const BlockLevel& next);

struct BoundsRow {
  std::string role;
  int j = 0;
  std::array<double, 5> ratios{};
};

std::vector<BoundsRow> bounds_report(const BlockLevel& level);

/// sup |(-Delta)^{n/2} f| for every n = 0..4.
std::array<double, 5> derivative_sups(const SpectralField& f);

}  // namespace mhdc
