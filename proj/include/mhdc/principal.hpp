// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mhdc/blocks.hpp"
#include "mhdc/scales.hpp"
#include "mhdc/spectral.hpp"

namespace mhdc {

/// Time-independent data of the approximate principal fields of one level.
/// With P_u = sum N psi_u + sum N psi_c and P_B = sum N psi_B:
///   vbar(t) = exp(-N^2 t) W,         W = -Lap P_u
///   hbar(t) = exp(-N^2 t) H,         H = -Lap P_B
///   Rbar(t) = -exp(-N^2 t) newD P_u, Hbar(t) = -exp(-N^2 t) D_s P_B
struct BarField {
  int k = 0;
  double N = 1.0;
  SpectralField Pu, PB, W, H;
  /// W (x) W - H (x) H and W (x) H - H (x) W, dealiased.
  SpectralField quad_u, quad_B;
};

BarField build_bar_fields(const BlockLevel& level);

/// One separable term of the Duhamel integrand: exp(-mu s) src(x).
struct DuhamelTerm {
  double mu = 0.0;
  SpectralField src_u, src_B;  ///< P div of the velocity and magnetic products
};

/// v_k, h_k and their potentials, generated by the bar fields of level k+1.
struct DuhamelField {
  int k = 0;
  std::vector<DuhamelTerm> terms;
};

DuhamelField build_duhamel_fields(const BarField& next);

struct ForcingPair {
  SpectralField f_u, f_B;
};

/// Sampled fields of one level.
struct PrincipalLevel {
  int k = 0;
  std::vector<double> time_samples;
  std::vector<SpectralField> vbar, hbar, v, h, Rbar, Hbar, R, H;
};

/// The approximate and exact principal pair truncated at depth K: bar fields
/// for levels 0..K and Duhamel fields for levels 0..K-1.
class PrincipalPair {
 public:
  PrincipalPair() = default;
  explicit PrincipalPair(std::vector<BarField> bars);
  /// Uses precomputed Duhamel fields; `duhamel` must hold one entry per level below the top.
  PrincipalPair(std::vector<BarField> bars, std::vector<DuhamelField> duhamel);

  int depth() const { return static_cast<int>(bars_.size()) - 1; }
  const TorusGrid& grid() const { return bars_.front().W.grid(); }
  const BarField& bar(int k) const { return bars_.at(static_cast<std::size_t>(k)); }
  const DuhamelField& duhamel(int k) const { return duh_.at(static_cast<std::size_t>(k)); }

  SpectralField vbar(int k, double t) const;
  SpectralField hbar(int k, double t) const;
  SpectralField Rbar(int k, double t) const;
  SpectralField Hbar(int k, double t) const;
  SpectralField v(int k, double t) const;
  SpectralField h(int k, double t) const;
  SpectralField R(int k, double t) const;
  SpectralField H(int k, double t) const;
  /// Time derivative of v_k, h_k (exact, per mode).
  SpectralField dv(int k, double t) const;
  SpectralField dh(int k, double t) const;

  /// v = sum over k < K of v_k, likewise h.
  SpectralField v(double t) const;
  SpectralField h(double t) const;
  /// Sum over all bar levels k <= K.
  SpectralField vbar(double t) const;
  SpectralField hbar(double t) const;

  /// Forcing of the truncated cascade, including the tail of level K.
  ForcingPair forcing(double t) const;
  /// Sum over k <= K of exp(-2 N_k^2 t) times the stored bar products.
  ForcingPair bar_quadratic(double t) const;

  PrincipalLevel sample(int k, const std::vector<double>& times) const;

 private:
  std::vector<BarField> bars_;
  std::vector<DuhamelField> duh_;
};

/// Moves every stored field of the pair to another grid (truncating).
PrincipalPair resample_pair(const PrincipalPair& pair, const TorusGrid& target);

/// Builds blocks for levels 0..k_max and the principal pair on a grid.
struct CascadeBuild {
  ScalePlan plan;
  BlockGeometry geometry;
  std::vector<BlockLevel> levels;
  PrincipalPair pair;
};

CascadeBuild build_cascade(const CascadeParams& params, const TorusGrid& g, std::uint64_t seed,
                           std::optional<double> delta0_override, const BuildOptions& opt = {});

/// Geometric grid, `per_octave` samples per factor two, covering [t_lo, t_hi].
std::vector<double> geometric_times(double t_lo, double t_hi, int per_octave);
/// Default sampling: 16 per octave over [t_{k_max}, 4 t_0] with t_0 = 1.
std::vector<double> default_time_samples(const ScalePlan& plan);

// ----------------------------------------------------------------------------

struct CascadeStepReport {
  int k = 0;
  double t = 0.0;
  double cutoff = 0.0;  ///< N_{1,k+1}
  double target_u = 0.0, target_B = 0.0;  ///< L2 norms of the right-hand sides
  double discrepancy_u = 0.0, discrepancy_B = 0.0;
  bool magnetic_normalised_by_velocity = false;
};

/// Compares the low-passed time integral of the level k+1 products with the
/// heat-evolved potentials of level k, after Leray projection on both sides.
CascadeStepReport cascade_step_check(const PrincipalPair& pair, int k, double t);

struct SeparationRow {
  int j = 0, jp = 0;
  double Nj = 0.0, Njp = 0.0;
  double value = 0.0;  ///< integral of N_j N_j' exp(-(N_j^2 + N_j'^2) s) over [0, t]
  double diag = 0.0;   ///< the j = j case
  double ratio = 0.0;  ///< value / diag
  double bound = 0.0;  ///< 2 N_j' / N_j
  bool holds = true;
};

struct SeparationTable {
  int k = 0;
  double t = 0.0;
  std::vector<SeparationRow> rows;
  double max_diag_defect = 0.0;  ///< max |diag - 1/2|
  bool bounds_hold = true;
};

SeparationTable scale_separation_table(const ScalePlan& plan, int k, double t);

struct Prop51Row {
  double t = 0.0;
  double err_u = 0.0;  ///< sup |Rbar_k - I_u - I_c|
  double err_B = 0.0;  ///< sup |Hbar_k - I_B|
  double ref_u = 0.0, ref_B = 0.0;  ///< sup |Rbar_k|, sup |Hbar_k|
};

struct Prop51Report {
  int k = 0;
  double alpha = 0.0;
  std::vector<Prop51Row> rows;
  double envelope_u = 0.0, envelope_B = 0.0;  ///< max err / (N^-alpha (t^alpha + 1))
  bool late_decay_u = true, late_decay_B = true;
};

/// I terms from the amplitude tensors of level k+1, evaluated exactly in time.
Prop51Report verify_prop51(const PrincipalPair& pair, const BlockLevel& next, int k, double t_k,
                           const std::vector<double>& times, double alpha = 0.05);

struct DiscrepancyRow {
  double t = 0.0;
  double R = 0.0, H = 0.0;  ///< sup |R_k - Rbar_k|, sup |H_k - Hbar_k|
};

std::vector<DiscrepancyRow> discrepancy_report(const PrincipalPair& pair, int k, const std::vector<double>& times);

struct ForcingRow {
  double t = 0.0;
  double sup_u = 0.0, sup_B = 0.0;
};

struct ForcingReport {
  double alpha = 0.0;
  std::vector<ForcingRow> rows;
  double envelope_u = 0.0, envelope_B = 0.0;  ///< max sup / (t^{-1+alpha} + 1)
};

ForcingReport build_forcing(const PrincipalPair& pair, const std::vector<double>& times, double alpha = 0.05);

// ----------------------------------------------------------------------------

/// Time-dependent fields entering the forced system.
struct TimeFields {
  std::function<SpectralField(double)> v, h;
  std::function<ForcingPair(double)> f;
};

TimeFields principal_fields(const PrincipalPair& pair);

struct ResidualLevel {
  int per_octave = 0;
  double residual_u = 0.0, residual_B = 0.0;  ///< max over centres, relative
};

struct ResidualReport {
  std::vector<double> centres;
  double scale_u = 0.0, scale_B = 0.0;  ///< max over centres of |Lap v|, |Lap h| (L2)
  std::vector<ResidualLevel> levels;
  std::vector<double> order_u, order_B;  ///< between consecutive refinements
};

/// Residual of both forced equations at the centre times, with the time
/// derivative taken by the five-point stencil of the geometric grid with
/// `per_octave` samples per octave, for every entry of `refinements`.
ResidualReport forced_residual(const TimeFields& f, const std::vector<double>& centres,
                               const std::vector<int>& refinements);

/// Residual at the interior points of an explicit time sample list: five-point
/// differences where two neighbours exist on each side, three-point otherwise.
/// Needs at least three samples.
std::vector<std::pair<double, double>> residual_on_samples(const TimeFields& f, const std::vector<double>& times);

struct ProbeRow {
  int n = 0;
  double t = 0.0;
  double v = 0.0, h = 0.0;        ///< sqrt(t) sup |vbar|, sqrt(t) sup |hbar|
  double curl_v = 0.0, curl_h = 0.0;  ///< t sup |curl|
  bool in_band = false;
};

struct ProbeTable {
  double lo = 0.05, hi = 20.0;
  std::vector<ProbeRow> rows;
  bool pass = false;
};

/// Probes at t_n = N_{1,n}^-2 for n = 0..K.
ProbeTable blowup_probe(const PrincipalPair& pair, const ScalePlan& plan, double lo, double hi);

struct CriticalNormReport {
  double t0 = 0.0, t1 = 0.0;
  double l2_linf_sq = 0.0;   ///< integral of sup|v|^2
  double weighted = 0.0;     ///< integral of sup|v| t^-1/2
  double windows = 0.0;      ///< log(t1/t0) / log A
  double coefficient = 0.0;  ///< l2_linf_sq / windows
};

CriticalNormReport critical_norm_probe(const std::function<SpectralField(double)>& v, double t0, double t1,
                                       double A, int per_octave = 16);

}  // namespace mhdc
