// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <algorithm>
#include <cmath>

#include "mhdc/errors.hpp"
#include "mhdc/principal.hpp"

namespace mhdc {

ForcingReport build_forcing(const PrincipalPair& pair, const std::vector<double>& times, double alpha) {
  ForcingReport rep;
  rep.alpha = alpha;
  for (double t : times) {
    const ForcingPair f = pair.forcing(t);
    ForcingRow row;
    row.t = t;
    row.sup_u = sup_norm(f.f_u);
    row.sup_B = sup_norm(f.f_B);
    const double w = std::pow(t, -1.0 + alpha) + 1.0;
    rep.envelope_u = std::max(rep.envelope_u, row.sup_u / w);
    rep.envelope_B = std::max(rep.envelope_B, row.sup_B / w);
    rep.rows.push_back(row);
  }
  return rep;
}

TimeFields principal_fields(const PrincipalPair& pair) {
  TimeFields f;
  f.v = [&pair](double t) { return pair.v(t); };
  f.h = [&pair](double t) { return pair.h(t); };
  f.f = [&pair](double t) { return pair.forcing(t); };
  return f;
}

namespace {

// Weights of the first derivative at x0 of the interpolating polynomial
// through the nodes xs.
std::vector<double> derivative_weights(double x0, const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m == i) continue;
      double prod = 1.0 / (xs[i] - xs[m]);
      for (std::size_t l = 0; l < n; ++l) {
        if (l == i || l == m) continue;
        prod *= (x0 - xs[l]) / (xs[i] - xs[l]);
      }
      acc += prod;
    }
    w[i] = acc;
  }
  return w;
}

struct Equations {
  SpectralField rest_u, rest_B;  ///< -Lap v + P div(v v - h h - f_u), and the h analogue
  double lap_u = 0.0, lap_B = 0.0;
};

Equations equations_at(const TimeFields& f, double t) {
  const SpectralField v = f.v(t), h = f.h(t);
  const ForcingPair fp = f.f(t);
  Equations e;
  const SpectralField lu = laplacian(v), lb = laplacian(h);
  e.lap_u = l2_norm(lu);
  e.lap_B = l2_norm(lb);
  e.rest_u = leray(div(outer_diff(v, v, h, h) - fp.f_u)) - lu;
  e.rest_B = leray(div(outer_diff(v, h, h, v) - fp.f_B)) - lb;
  return e;
}

std::pair<double, double> residual_with(const TimeFields& f, const Equations& e, double t,
                                        const std::vector<double>& xs) {
  const std::vector<double> w = derivative_weights(t, xs);
  SpectralField du = e.rest_u, dh = e.rest_B;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (w[i] == 0.0) continue;
    du.axpy(w[i], f.v(xs[i]));
    dh.axpy(w[i], f.h(xs[i]));
  }
  return {l2_norm(du), l2_norm(dh)};
}

}  // namespace

ResidualReport forced_residual(const TimeFields& f, const std::vector<double>& centres,
                               const std::vector<int>& refinements) {
  if (centres.empty() || refinements.empty())
    throw InsufficientSamples("forced_residual needs at least one centre and one refinement");
  for (int m : refinements)
    if (m < 1) throw InsufficientSamples("forced_residual: samples per octave must be positive");
  ResidualReport rep;
  rep.centres = centres;
  std::vector<std::vector<std::pair<double, double>>> raw(refinements.size());
  for (double t : centres) {
    if (!(t > 0.0)) throw NegativeTime("forced_residual: centre times must be positive");
    const Equations e = equations_at(f, t);
    rep.scale_u = std::max(rep.scale_u, e.lap_u);
    rep.scale_B = std::max(rep.scale_B, e.lap_B);
    for (std::size_t r = 0; r < refinements.size(); ++r) {
      const double q = std::exp2(1.0 / refinements[r]);
      std::vector<double> xs;
      for (int i = -2; i <= 2; ++i) xs.push_back(i == 0 ? t : t * std::pow(q, i));
      raw[r].push_back(residual_with(f, e, t, xs));
    }
  }
  const double su = rep.scale_u > 0.0 ? rep.scale_u : 1.0;
  const double sb = rep.scale_B > 0.0 ? rep.scale_B : su;
  for (std::size_t r = 0; r < refinements.size(); ++r) {
    ResidualLevel lv;
    lv.per_octave = refinements[r];
    for (const auto& [a, b] : raw[r]) {
      lv.residual_u = std::max(lv.residual_u, a / su);
      lv.residual_B = std::max(lv.residual_B, b / sb);
    }
    rep.levels.push_back(lv);
  }
  for (std::size_t r = 0; r + 1 < rep.levels.size(); ++r) {
    const double lm = std::log(static_cast<double>(rep.levels[r + 1].per_octave) / rep.levels[r].per_octave);
    auto order = [lm](double a, double b) { return (a > 0.0 && b > 0.0) ? std::log(a / b) / lm : 0.0; };
    rep.order_u.push_back(order(rep.levels[r].residual_u, rep.levels[r + 1].residual_u));
    rep.order_B.push_back(order(rep.levels[r].residual_B, rep.levels[r + 1].residual_B));
  }
  return rep;
}

std::vector<std::pair<double, double>> residual_on_samples(const TimeFields& f, const std::vector<double>& times) {
  if (times.size() < 3) throw InsufficientSamples("finite differences in time need at least 3 samples");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw InsufficientSamples("time samples must be strictly increasing");
  std::vector<std::pair<double, double>> out;
  const std::size_t n = times.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const std::size_t lo = (i >= 2 && i + 2 < n) ? i - 2 : i - 1;
    const std::size_t hi = (i >= 2 && i + 2 < n) ? i + 2 : i + 1;
    const std::vector<double> xs(times.begin() + static_cast<long>(lo), times.begin() + static_cast<long>(hi) + 1);
    const Equations e = equations_at(f, times[i]);
    out.push_back(residual_with(f, e, times[i], xs));
  }
  return out;
}

ProbeTable blowup_probe(const PrincipalPair& pair, const ScalePlan& plan, double lo, double hi) {
  ProbeTable tab;
  tab.lo = lo;
  tab.hi = hi;
  tab.pass = true;
  for (int n = 0; n <= pair.depth(); ++n) {
    ProbeRow row;
    row.n = n;
    row.t = std::exp(-2.0 * log_mpz(plan.n_at(1, n)));
    const SpectralField v = pair.vbar(row.t), h = pair.hbar(row.t);
    const double st = std::sqrt(row.t);
    row.v = st * sup_norm(v);
    row.h = st * sup_norm(h);
    row.curl_v = row.t * sup_norm(curl(v));
    row.curl_h = row.t * sup_norm(curl(h));
    row.in_band = row.v >= lo && row.v <= hi && row.h >= lo && row.h <= hi;
    if (!row.in_band) tab.pass = false;
    tab.rows.push_back(row);
  }
  return tab;
}

CriticalNormReport critical_norm_probe(const std::function<SpectralField(double)>& v, double t0, double t1,
                                       double A, int per_octave) {
  if (!(t0 > 0.0) || t1 < t0) throw Error("critical_norm_probe: need 0 < t0 <= t1");
  CriticalNormReport r;
  r.t0 = t0;
  r.t1 = t1;
  r.windows = std::log(t1 / t0) / std::log(A);
  if (t1 == t0) return r;
  const double octaves = std::log2(t1 / t0);
  const long n = std::max(2L, static_cast<long>(std::ceil(octaves * per_octave)));
  double prev_t = t0, prev_a = 0.0, prev_b = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double t = t0 * std::pow(t1 / t0, static_cast<double>(i) / n);
    const double s = sup_norm(v(t));
    const double a = s * s, b = s / std::sqrt(t);
    if (i > 0) {
      r.l2_linf_sq += 0.5 * (a + prev_a) * (t - prev_t);
      r.weighted += 0.5 * (b + prev_b) * (t - prev_t);
    }
    prev_t = t;
    prev_a = a;
    prev_b = b;
  }
  r.coefficient = r.windows > 0.0 ? r.l2_linf_sq / r.windows : 0.0;
  return r;
}

}  // namespace mhdc
