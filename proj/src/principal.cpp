// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include "mhdc/principal.hpp"

#include <algorithm>
#include <cmath>

#include "mhdc/errors.hpp"

namespace mhdc {

BarField build_bar_fields(const BlockLevel& level) {
  BarField b;
  b.k = level.k;
  b.N = level.N;
  const TorusGrid& g = level.grid;
  b.Pu = level.sum_u.empty() ? SpectralField(g, Rank::Vector) : level.sum_u;
  if (!level.sum_c.empty()) b.Pu += level.sum_c;
  b.PB = level.sum_B.empty() ? SpectralField(g, Rank::Vector) : level.sum_B;
  b.W = -1.0 * laplacian(b.Pu);
  b.H = -1.0 * laplacian(b.PB);
  b.quad_u = outer_diff(b.W, b.W, b.H, b.H);
  b.quad_B = outer_diff(b.W, b.H, b.H, b.W);
  return b;
}

DuhamelField build_duhamel_fields(const BarField& next) {
  const TorusGrid& g = next.W.grid();
  const double reach = 2.0 * next.N;
  if (next.N > g.band())
    throw GridTooCoarse("carrier " + std::to_string(next.N) + " of level " + std::to_string(next.k) +
                        " exceeds the grid band " + std::to_string(g.band()) + " (products reach " +
                        std::to_string(reach) + ")");
  DuhamelField d;
  d.k = next.k - 1;
  DuhamelTerm t;
  t.mu = 2.0 * next.N * next.N;
  t.src_u = leray(div(next.quad_u));
  t.src_B = leray(div(next.quad_B));
  d.terms.push_back(std::move(t));
  return d;
}

PrincipalPair::PrincipalPair(std::vector<BarField> bars) : bars_(std::move(bars)) {
  if (bars_.empty()) throw Error("PrincipalPair: needs at least one bar level");
  for (std::size_t k = 0; k + 1 < bars_.size(); ++k) duh_.push_back(build_duhamel_fields(bars_[k + 1]));
}

PrincipalPair::PrincipalPair(std::vector<BarField> bars, std::vector<DuhamelField> duhamel)
    : bars_(std::move(bars)), duh_(std::move(duhamel)) {
  if (bars_.empty() || duh_.size() + 1 != bars_.size())
    throw Error("PrincipalPair: one Duhamel field per level below the top is required");
}

PrincipalPair resample_pair(const PrincipalPair& pair, const TorusGrid& target) {
  std::vector<BarField> bars;
  std::vector<DuhamelField> duh;
  for (int k = 0; k <= pair.depth(); ++k) {
    BarField b = pair.bar(k);
    for (SpectralField* f : {&b.Pu, &b.PB, &b.W, &b.H, &b.quad_u, &b.quad_B}) *f = resample(*f, target);
    bars.push_back(std::move(b));
  }
  for (int k = 0; k < pair.depth(); ++k) {
    DuhamelField d = pair.duhamel(k);
    for (auto& t : d.terms) {
      t.src_u = resample(t.src_u, target);
      t.src_B = resample(t.src_B, target);
    }
    duh.push_back(std::move(d));
  }
  return PrincipalPair(std::move(bars), std::move(duh));
}

namespace {

double decay(const BarField& b, double t) {
  if (t < 0.0) throw NegativeTime("principal fields require t >= 0");
  return std::exp(-b.N * b.N * t);
}

SpectralField duhamel_sum(const DuhamelField& d, double t, bool magnetic,
                          SpectralField (*op)(const SpectralField&)) {
  SpectralField out;
  for (const auto& term : d.terms) {
    const SpectralField& src = magnetic ? term.src_B : term.src_u;
    SpectralField x = duhamel_separable(op ? op(src) : src, term.mu, t);
    if (out.empty()) out = std::move(x);
    else out += x;
  }
  out *= -1.0;
  return out;
}

SpectralField duhamel_rate(const DuhamelField& d, double t, bool magnetic) {
  const SpectralField val = duhamel_sum(d, t, magnetic, nullptr);
  SpectralField out = laplacian(val);
  for (const auto& term : d.terms) out.axpy(-std::exp(-term.mu * t), magnetic ? term.src_B : term.src_u);
  return out;
}

}  // namespace

SpectralField PrincipalPair::vbar(int k, double t) const {
  const BarField& b = bar(k);
  return decay(b, t) * b.W;
}

SpectralField PrincipalPair::hbar(int k, double t) const {
  const BarField& b = bar(k);
  return decay(b, t) * b.H;
}

SpectralField PrincipalPair::Rbar(int k, double t) const {
  const BarField& b = bar(k);
  return -decay(b, t) * op_newD(b.Pu);
}

SpectralField PrincipalPair::Hbar(int k, double t) const {
  const BarField& b = bar(k);
  return -decay(b, t) * op_Ds(b.PB);
}

SpectralField PrincipalPair::v(int k, double t) const { return duhamel_sum(duhamel(k), t, false, nullptr); }
SpectralField PrincipalPair::h(int k, double t) const { return duhamel_sum(duhamel(k), t, true, nullptr); }
SpectralField PrincipalPair::R(int k, double t) const { return duhamel_sum(duhamel(k), t, false, &op_calR); }
SpectralField PrincipalPair::H(int k, double t) const { return duhamel_sum(duhamel(k), t, true, &op_calRs); }
SpectralField PrincipalPair::dv(int k, double t) const { return duhamel_rate(duhamel(k), t, false); }
SpectralField PrincipalPair::dh(int k, double t) const { return duhamel_rate(duhamel(k), t, true); }

SpectralField PrincipalPair::v(double t) const {
  SpectralField out(grid(), Rank::Vector);
  for (int k = 0; k < depth(); ++k) out += v(k, t);
  return out;
}

SpectralField PrincipalPair::h(double t) const {
  SpectralField out(grid(), Rank::Vector);
  for (int k = 0; k < depth(); ++k) out += h(k, t);
  return out;
}

SpectralField PrincipalPair::vbar(double t) const {
  SpectralField out(grid(), Rank::Vector);
  for (int k = 0; k <= depth(); ++k) out += vbar(k, t);
  return out;
}

SpectralField PrincipalPair::hbar(double t) const {
  SpectralField out(grid(), Rank::Vector);
  for (int k = 0; k <= depth(); ++k) out += hbar(k, t);
  return out;
}

ForcingPair PrincipalPair::bar_quadratic(double t) const {
  ForcingPair q{SpectralField(grid(), Rank::Tensor), SpectralField(grid(), Rank::Tensor)};
  for (int k = 0; k <= depth(); ++k) {
    const BarField& b = bar(k);
    const double e = decay(b, t);
    q.f_u.axpy(e * e, b.quad_u);
    q.f_B.axpy(e * e, b.quad_B);
  }
  return q;
}

ForcingPair PrincipalPair::forcing(double t) const {
  const SpectralField vv = v(t), hh = h(t);
  ForcingPair f{outer_diff(vv, vv, hh, hh), outer_diff(vv, hh, hh, vv)};
  const ForcingPair q = bar_quadratic(t);
  f.f_u -= q.f_u;
  f.f_B -= q.f_B;
  return f;
}

PrincipalLevel PrincipalPair::sample(int k, const std::vector<double>& times) const {
  PrincipalLevel L;
  L.k = k;
  L.time_samples = times;
  const bool has_duhamel = k < depth();
  for (double t : times) {
    L.vbar.push_back(vbar(k, t));
    L.hbar.push_back(hbar(k, t));
    L.Rbar.push_back(Rbar(k, t));
    L.Hbar.push_back(Hbar(k, t));
    if (has_duhamel) {
      L.v.push_back(v(k, t));
      L.h.push_back(h(k, t));
      L.R.push_back(R(k, t));
      L.H.push_back(H(k, t));
    }
  }
  return L;
}

CascadeBuild build_cascade(const CascadeParams& params, const TorusGrid& g, std::uint64_t seed,
                           std::optional<double> delta0_override, const BuildOptions& opt) {
  if (g.d != 3) throw Error("build_cascade: the block construction is three dimensional");
  CascadeBuild cb;
  cb.plan = build_plan(params);
  cb.geometry = make_block_geometry(default_lambda_u(), builtin_lambda_B(16), params.J_d, seed, delta0_override);
  cb.levels.push_back(init_level0(cb.geometry.lambda_u, g));
  AmplitudeConstants constants;
  std::vector<LevelSupport> history;
  for (int k = 1; k <= params.k_max; ++k) {
    cb.levels.push_back(next_level(cb.levels.back(), cb.plan, constants, cb.geometry, history, opt));
    history.push_back(LevelSupport{cb.levels.back().M, &cb.geometry.layout});
  }
  std::vector<BarField> bars;
  for (const auto& L : cb.levels) bars.push_back(build_bar_fields(L));
  cb.pair = PrincipalPair(std::move(bars));
  return cb;
}

std::vector<double> geometric_times(double t_lo, double t_hi, int per_octave) {
  if (!(t_lo > 0.0) || t_hi < t_lo || per_octave < 1) throw Error("geometric_times: invalid window");
  const double steps = std::log2(t_hi / t_lo) * per_octave;
  const long n = static_cast<long>(std::floor(steps + 1e-9));
  std::vector<double> out;
  for (long i = 0; i <= n; ++i) out.push_back(t_lo * std::exp2(static_cast<double>(i) / per_octave));
  return out;
}

std::vector<double> default_time_samples(const ScalePlan& plan) {
  return geometric_times(plan.t.at(plan.params.k_max), 4.0, 16);
}

// ----------------------------------------------------------------------------

CascadeStepReport cascade_step_check(const PrincipalPair& pair, int k, double t) {
  if (k < 0 || k >= pair.depth()) throw Error("cascade_step_check: level " + std::to_string(k) + " has no successor");
  CascadeStepReport r;
  r.k = k;
  r.t = t;
  r.cutoff = pair.bar(k + 1).N;
  const BarField& b = pair.bar(k);
  // Both sides carry a minus sign relative to the displayed identity.
  const SpectralField lhs_u = low_pass(pair.v(k, t), r.cutoff);
  const SpectralField lhs_B = low_pass(pair.h(k, t), r.cutoff);
  const SpectralField rhs_u = heat(leray(b.W), t);
  const SpectralField rhs_B = heat(leray(b.H), t);
  r.target_u = l2_norm(rhs_u);
  r.target_B = l2_norm(rhs_B);
  const double eu = l2_norm(lhs_u - rhs_u);
  const double eb = l2_norm(lhs_B - rhs_B);
  r.discrepancy_u = r.target_u > 0.0 ? eu / r.target_u : eu;
  if (r.target_B > 1e-14 * r.target_u) {
    r.discrepancy_B = eb / r.target_B;
  } else {
    r.magnetic_normalised_by_velocity = true;
    r.discrepancy_B = r.target_u > 0.0 ? eb / r.target_u : eb;
  }
  return r;
}

SeparationTable scale_separation_table(const ScalePlan& plan, int k, double t) {
  if (t < 0.0) throw NegativeTime("scale_separation_table requires t >= 0");
  SeparationTable tab;
  tab.k = k;
  tab.t = t;
  const int J = plan.params.d == 2 ? plan.params.J_d : 1;
  auto diag_of = [&](double lnN) {
    const double x = 2.0 * std::exp(2.0 * lnN) * t;
    return -0.5 * std::expm1(-x);
  };
  for (int j = 1; j <= J; ++j) {
    const double lj = log_mpz(plan.n_at(j, k));
    const double dj = diag_of(lj);
    tab.max_diag_defect = std::max(tab.max_diag_defect, std::abs(dj - 0.5));
    for (int jp = 1; jp <= j; ++jp) {
      const double lp = log_mpz(plan.n_at(jp, k));
      SeparationRow row;
      row.j = j;
      row.jp = jp;
      row.Nj = std::exp(lj);
      row.Njp = std::exp(lp);
      const double r = std::exp(lp - lj);
      const double sum_sq = std::exp(2.0 * lj) * (1.0 + r * r);
      row.value = r * (-std::expm1(-sum_sq * t)) / (1.0 + r * r);
      row.diag = dj;
      row.ratio = dj > 0.0 ? row.value / dj : 0.0;
      row.bound = 2.0 * r;
      row.holds = jp == j ? true : row.ratio <= row.bound * (1.0 + 1e-12);
      if (!row.holds) tab.bounds_hold = false;
      tab.rows.push_back(row);
    }
  }
  return tab;
}

Prop51Report verify_prop51(const PrincipalPair& pair, const BlockLevel& next, int k, double t_k,
                           const std::vector<double>& times, double alpha) {
  if (next.k != k + 1) throw Error("verify_prop51: amplitude level must be k + 1");
  Prop51Report rep;
  rep.k = k;
  rep.alpha = alpha;
  const double N = next.N;
  const double mu = 2.0 * N * N;
  const SpectralField Qu = op_Q(next.amp_u + next.amp_c);
  const SpectralField Qs = op_Qs(next.amp_s);
  const double env = std::pow(N, -alpha);
  double at_tk_u = -1.0, at_tk_B = -1.0, late_u = 0.0, late_B = 0.0;
  for (double t : times) {
    Prop51Row row;
    row.t = t;
    const SpectralField Rb = pair.Rbar(k, t), Hb = pair.Hbar(k, t);
    const SpectralField Iu = -N * N * duhamel_separable(Qu, mu, t);
    const SpectralField IB = -N * N * duhamel_separable(Qs, mu, t);
    row.err_u = sup_norm(Rb - Iu);
    row.err_B = sup_norm(Hb - IB);
    row.ref_u = sup_norm(Rb);
    row.ref_B = sup_norm(Hb);
    const double w = env * (std::pow(t, alpha) + 1.0);
    rep.envelope_u = std::max(rep.envelope_u, row.err_u / w);
    rep.envelope_B = std::max(rep.envelope_B, row.err_B / w);
    if (t >= t_k && at_tk_u < 0.0) {
      at_tk_u = row.err_u;
      at_tk_B = row.err_B;
    } else if (t > t_k) {
      late_u = std::max(late_u, row.err_u);
      late_B = std::max(late_B, row.err_B);
    }
    rep.rows.push_back(row);
  }
  if (at_tk_u >= 0.0) {
    rep.late_decay_u = late_u <= at_tk_u;
    rep.late_decay_B = late_B <= at_tk_B;
  }
  return rep;
}

std::vector<DiscrepancyRow> discrepancy_report(const PrincipalPair& pair, int k, const std::vector<double>& times) {
  std::vector<DiscrepancyRow> rows;
  for (double t : times) {
    DiscrepancyRow r;
    r.t = t;
    r.R = sup_norm(pair.R(k, t) - pair.Rbar(k, t));
    r.H = sup_norm(pair.H(k, t) - pair.Hbar(k, t));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace mhdc
