// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <algorithm>
#include <cmath>

#include "mhdc/errors.hpp"
#include "mhdc/kernels.hpp"
#include "mhdc/spectral.hpp"

namespace mhdc {

namespace {

constexpr cplx kI(0.0, 1.0);

void require_rank(const SpectralField& f, Rank r, const char* op) {
  if (f.rank() != r) throw Error(std::string(op) + ": wrong field rank");
}

void require_same(const SpectralField& a, const SpectralField& b, const char* op) {
  if (a.grid() != b.grid() || a.rank() != b.rank())
    throw Error(std::string(op) + ": incompatible fields");
}

}  // namespace

SpectralField::SpectralField(const TorusGrid& g, Rank r)
    : grid_(g), rank_(r), ncomp_(rank_components(r, g.d)), data_(g.spec_size() * ncomp_) {}

SpectralField SpectralField::component(int c) const {
  SpectralField s(grid_, Rank::Scalar);
  std::copy(comp(c), comp(c) + grid_.spec_size(), s.comp(0));
  return s;
}

void SpectralField::set_component(int c, const SpectralField& s) {
  if (s.grid() != grid_ || s.rank() != Rank::Scalar) throw Error("set_component: bad input");
  std::copy(s.comp(0), s.comp(0) + grid_.spec_size(), comp(c));
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same(*this, o, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same(*this, o, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

void SpectralField::axpy(double s, const SpectralField& o) {
  require_same(*this, o, "axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
}

void SpectralField::set_zero() { std::fill(data_.begin(), data_.end(), cplx(0.0, 0.0)); }

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

SpectralField truncate(const SpectralField& f, int K) {
  SpectralField out = f;
  const ModeTables& mt = modes(f.grid());
  const std::size_t S = f.modes_per_comp();
  for (int c = 0; c < f.ncomp(); ++c) {
    cplx* p = out.comp(c);
    for (std::size_t i = 0; i < S; ++i) {
      bool keep = mt.nyquist[i] == 0;
      for (int a = 0; a < f.grid().d && keep; ++a) keep = std::abs(mt.ik[a][i]) <= K;
      if (!keep) p[i] = 0.0;
    }
  }
  return out;
}

void clear_nyquist(SpectralField& f) {
  const ModeTables& mt = modes(f.grid());
  for (int c = 0; c < f.ncomp(); ++c)
    for (std::size_t i = 0; i < f.modes_per_comp(); ++i)
      if (mt.nyquist[i]) f.comp(c)[i] = 0.0;
}

SpectralField resample(const SpectralField& f, const TorusGrid& target) {
  if (target.d != f.grid().d) throw Error("resample: dimension mismatch");
  SpectralField out(target, f.rank());
  const ModeTables& mt = modes(f.grid());
  for (std::size_t i = 0; i < f.modes_per_comp(); ++i) {
    if (mt.nyquist[i]) continue;
    int kv[3] = {mt.ik[0][i], mt.ik[1][i], mt.ik[2][i]};
    std::size_t j;
    bool conj;
    if (!mode_index(target, kv, j, conj)) continue;
    for (int c = 0; c < f.ncomp(); ++c) {
      const cplx v = f.comp(c)[i];
      out.comp(c)[j] = conj ? std::conj(v) : v;
    }
  }
  return out;
}

double inner(const SpectralField& f, const SpectralField& g) {
  require_same(f, g, "inner");
  const ModeTables& mt = modes(f.grid());
  double s = 0.0;
  for (int c = 0; c < f.ncomp(); ++c) {
    const cplx* a = f.comp(c);
    const cplx* b = g.comp(c);
    for (std::size_t i = 0; i < f.modes_per_comp(); ++i)
      s += mt.weight[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  }
  return s;
}

double l2_norm(const SpectralField& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

double sup_norm(const PhysicalField& p) {
  const std::size_t R = p.grid.real_size();
  const auto& K = kernels::active();
  if (p.ncomp == 1) return K.max_abs(p.comp(0), R);
  double m = 0.0;
  for (std::size_t i = 0; i < R; ++i) {
    double s = 0.0;
    for (int c = 0; c < p.ncomp; ++c) s += p.comp(c)[i] * p.comp(c)[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

double sup_norm(const SpectralField& f) { return sup_norm(to_physical(f)); }

double max_coefficient(const SpectralField& f) {
  double m = 0.0;
  for (const auto& v : f.data()) m = std::max(m, std::abs(v));
  return m;
}

SpectralField apply_radial(const SpectralField& f, const std::function<double(double)>& m) {
  const ModeTables& mt = modes(f.grid());
  const std::size_t S = f.modes_per_comp();
  std::vector<double> mult(S);
  for (std::size_t i = 0; i < S; ++i) mult[i] = mt.nyquist[i] ? 0.0 : m(mt.k2[i]);
  SpectralField out = f;
  const auto& K = kernels::active();
  for (int c = 0; c < f.ncomp(); ++c) K.mul_real(out.comp(c), mult.data(), S);
  return out;
}

SpectralField heat(const SpectralField& f, double t) {
  if (t < 0.0) throw NegativeTime("heat requires t >= 0");
  return apply_radial(f, [t](double k2) { return std::exp(-k2 * t); });
}

SpectralField leray(const SpectralField& f) {
  require_rank(f, Rank::Vector, "leray");
  const TorusGrid& g = f.grid();
  const ModeTables& mt = modes(g);
  const std::size_t S = f.modes_per_comp();
  SpectralField out = f;
  const auto& K = kernels::active();
  if (g.d == 3) {
    K.leray3(out.comp(0), out.comp(1), out.comp(2), mt.k[0].data(), mt.k[1].data(),
             mt.k[2].data(), mt.inv_k2.data(), S);
  } else {
    std::vector<cplx> zeros(S);
    K.leray3(out.comp(0), out.comp(1), zeros.data(), mt.k[0].data(), mt.k[1].data(),
             mt.k[2].data(), mt.inv_k2.data(), S);
  }
  return out;
}

SpectralField grad(const SpectralField& f) {
  const TorusGrid& g = f.grid();
  const ModeTables& mt = modes(g);
  const std::size_t S = f.modes_per_comp();
  const int d = g.d;
  if (f.rank() == Rank::Scalar) {
    SpectralField out(g, Rank::Vector);
    for (int a = 0; a < d; ++a)
      for (std::size_t i = 0; i < S; ++i) out.comp(a)[i] = kI * mt.k[a][i] * f.comp(0)[i];
    return out;
  }
  require_rank(f, Rank::Vector, "grad");
  SpectralField out(g, Rank::Tensor);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (std::size_t i = 0; i < S; ++i) out.comp(a * d + b)[i] = kI * mt.k[a][i] * f.comp(b)[i];
  return out;
}

SpectralField div(const SpectralField& f) {
  const TorusGrid& g = f.grid();
  const ModeTables& mt = modes(g);
  const std::size_t S = f.modes_per_comp();
  const int d = g.d;
  if (f.rank() == Rank::Vector) {
    SpectralField out(g, Rank::Scalar);
    for (std::size_t i = 0; i < S; ++i) {
      cplx s = 0.0;
      for (int a = 0; a < d; ++a) s += mt.k[a][i] * f.comp(a)[i];
      out.comp(0)[i] = kI * s;
    }
    return out;
  }
  require_rank(f, Rank::Tensor, "div");
  SpectralField out(g, Rank::Vector);
  for (int b = 0; b < d; ++b)
    for (std::size_t i = 0; i < S; ++i) {
      cplx s = 0.0;
      for (int a = 0; a < d; ++a) s += mt.k[a][i] * f.comp(a * d + b)[i];
      out.comp(b)[i] = kI * s;
    }
  return out;
}

SpectralField laplacian(const SpectralField& f) {
  return apply_radial(f, [](double k2) { return -k2; });
}

SpectralField inv_laplacian(const SpectralField& f) {
  return apply_radial(f, [](double k2) { return k2 > 0.0 ? -1.0 / k2 : 0.0; });
}

SpectralField p_nonzero(const SpectralField& f) {
  return apply_radial(f, [](double k2) { return k2 > 0.0 ? 1.0 : 0.0; });
}

SpectralField zero_mode_only(const SpectralField& f) {
  return apply_radial(f, [](double k2) { return k2 > 0.0 ? 0.0 : 1.0; });
}

SpectralField sym_grad(const SpectralField& f) {
  require_rank(f, Rank::Vector, "sym_grad");
  SpectralField gr = grad(f);
  SpectralField t = transpose(gr);
  gr += t;
  gr *= 0.5;
  return gr;
}

SpectralField transpose(const SpectralField& t) {
  require_rank(t, Rank::Tensor, "transpose");
  const int d = t.grid().d;
  SpectralField out(t.grid(), Rank::Tensor);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      std::copy(t.comp(a * d + b), t.comp(a * d + b) + t.modes_per_comp(), out.comp(b * d + a));
  return out;
}

SpectralField trace(const SpectralField& t) {
  require_rank(t, Rank::Tensor, "trace");
  const int d = t.grid().d;
  SpectralField out(t.grid(), Rank::Scalar);
  for (int a = 0; a < d; ++a)
    for (std::size_t i = 0; i < t.modes_per_comp(); ++i) out.comp(0)[i] += t.comp(a * d + a)[i];
  return out;
}

SpectralField times_identity(const SpectralField& s, int d) {
  require_rank(s, Rank::Scalar, "times_identity");
  SpectralField out(s.grid(), Rank::Tensor);
  for (int a = 0; a < d; ++a) out.set_component(a * d + a, s);
  return out;
}

SpectralField curl(const SpectralField& f) {
  require_rank(f, Rank::Vector, "curl");
  if (f.grid().d != 3) throw Error("curl: d = 3 only");
  const ModeTables& mt = modes(f.grid());
  SpectralField out(f.grid(), Rank::Vector);
  for (std::size_t i = 0; i < f.modes_per_comp(); ++i) {
    const double kx = mt.k[0][i], ky = mt.k[1][i], kz = mt.k[2][i];
    const cplx fx = f.comp(0)[i], fy = f.comp(1)[i], fz = f.comp(2)[i];
    out.comp(0)[i] = kI * (ky * fz - kz * fy);
    out.comp(1)[i] = kI * (kz * fx - kx * fz);
    out.comp(2)[i] = kI * (kx * fy - ky * fx);
  }
  return out;
}

SpectralField op_D(const SpectralField& f) {
  SpectralField out = sym_grad(f);
  out *= 2.0;
  SpectralField dv = div(f);
  out.axpy(-2.0, times_identity(dv, f.grid().d));
  return out;
}

SpectralField op_newD(const SpectralField& f) {
  SpectralField out = sym_grad(f);
  out *= 2.0;
  SpectralField dv = div(f);
  out.axpy(-1.0, times_identity(dv, f.grid().d));
  return out;
}

SpectralField op_Ds(const SpectralField& f) {
  SpectralField gr = grad(f);
  SpectralField out = gr - transpose(gr);
  out += times_identity(div(f), f.grid().d);
  return out;
}

SpectralField op_calR(const SpectralField& f) { return inv_laplacian(op_newD(f)); }

SpectralField op_calRs(const SpectralField& f) { return inv_laplacian(op_Ds(f)); }

// Direct per-mode multipliers: with g = P div T,
// Q T = (-1/|k|^2) i (k_a g_b + k_b g_a), Qs T = (-1/|k|^2) i (k_a g_b - k_b g_a).
SpectralField op_Q(const SpectralField& t) {
  require_rank(t, Rank::Tensor, "op_Q");
  const SpectralField g = leray(div(t));
  const ModeTables& mt = modes(t.grid());
  const int d = t.grid().d;
  SpectralField out(t.grid(), Rank::Tensor);
  for (std::size_t i = 0; i < t.modes_per_comp(); ++i) {
    const double s = -mt.inv_k2[i];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        out.comp(a * d + b)[i] = s * kI * (mt.k[a][i] * g.comp(b)[i] + mt.k[b][i] * g.comp(a)[i]);
  }
  return out;
}

SpectralField op_Qs(const SpectralField& t) {
  require_rank(t, Rank::Tensor, "op_Qs");
  const SpectralField g = leray(div(t));
  const ModeTables& mt = modes(t.grid());
  const int d = t.grid().d;
  SpectralField out(t.grid(), Rank::Tensor);
  for (std::size_t i = 0; i < t.modes_per_comp(); ++i) {
    const double s = -mt.inv_k2[i];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        out.comp(a * d + b)[i] = s * kI * (mt.k[a][i] * g.comp(b)[i] - mt.k[b][i] * g.comp(a)[i]);
  }
  return out;
}

namespace {

double smooth_unit_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double e0 = std::exp(-1.0 / s);
  const double e1 = std::exp(-1.0 / (1.0 - s));
  return e0 / (e0 + e1);
}

}  // namespace

double lp_step(double r) {
  constexpr double lo = 4.0 / 3.0, hi = 1.5;
  return 1.0 - smooth_unit_step((r - lo) / (hi - lo));
}

double lp_bump(double r) { return lp_step(r) - lp_step(2.0 * r); }

SpectralField littlewood_paley(const SpectralField& f, double N) {
  return apply_radial(f, [N](double k2) { return lp_bump(std::sqrt(k2) / N); });
}

SpectralField low_pass(const SpectralField& f, double N) {
  return apply_radial(f, [N](double k2) { return std::sqrt(k2) < N ? 1.0 : 0.0; });
}

double duhamel_coefficient(double lambda, double mu, double t) {
  if (t < 0.0) throw NegativeTime("duhamel requires t >= 0");
  const double lo = std::min(lambda, mu);
  const double gap = std::fabs(lambda - mu);
  const double base = std::exp(-lo * t);
  if (gap < 1e-8 * std::max({lambda, mu, 1.0})) {
    const double x = gap * t;
    return base * t * (1.0 - x / 2.0 + x * x / 6.0);
  }
  return base * (-std::expm1(-gap * t)) / gap;
}

SpectralField duhamel_separable(const SpectralField& f, double mu, double t) {
  if (mu < 0.0) throw Error("duhamel_separable: mu must be nonnegative");
  return apply_radial(f, [mu, t](double k2) { return duhamel_coefficient(k2, mu, t); });
}

SpectralField random_field(const TorusGrid& g, Rank r, int K, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  PhysicalField p(g, r);
  for (auto& v : p.data) v = nd(rng);
  SpectralField f = to_spectral(p, false);
  return truncate(f, std::min(K, g.n / 2 - 1));
}

SpectralField single_mode(const TorusGrid& g, Rank r, int c, const int* kv, double amp,
                          bool cosine) {
  SpectralField f(g, r);
  std::size_t i;
  bool conj;
  if (!mode_index(g, kv, i, conj)) throw GridTooCoarse("single_mode: wavevector outside grid");
  int neg[3] = {-kv[0], -kv[1], g.d == 3 ? -kv[2] : 0};
  std::size_t j;
  bool conj2;
  mode_index(g, neg, j, conj2);
  // sin(k.x) = (e^{ikx} - e^{-ikx}) / 2i, cos(k.x) = (e^{ikx} + e^{-ikx}) / 2.
  const cplx plus = cosine ? cplx(0.5 * amp, 0.0) : cplx(0.0, -0.5 * amp);
  const cplx minus = cosine ? cplx(0.5 * amp, 0.0) : cplx(0.0, 0.5 * amp);
  bool zero = true;
  for (int a = 0; a < g.d; ++a) zero = zero && kv[a] == 0;
  if (zero) {
    f.comp(c)[i] = cosine ? cplx(amp, 0.0) : cplx(0.0, 0.0);
    return f;
  }
  f.comp(c)[i] += conj ? std::conj(plus) : plus;
  if (j != i) f.comp(c)[j] += minus;
  return f;
}

}  // namespace mhdc
