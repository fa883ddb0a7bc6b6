// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include "mhdc/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "mhdc/errors.hpp"
#include "mhdc/kernels.hpp"

namespace mhdc {

// ----------------------------------------------------------------------------
// Background pair.

namespace {

SpectralField shear_pair(const TorusGrid& g, double amp, bool swap) {
  SpectralField f(g, Rank::Vector);
  if (amp == 0.0) return f;
  if (g.d != 3) throw Error("background pair is defined for d = 3");
  const int kz[3] = {0, 0, 1};
  f.set_component(0, single_mode(g, Rank::Scalar, 0, kz, amp, swap));
  f.set_component(1, single_mode(g, Rank::Scalar, 0, kz, amp, !swap));
  return f;
}

}  // namespace

SpectralField Background::U(const TorusGrid& g, double t) const {
  if (kind == BackgroundKind::Zero) return SpectralField(g, Rank::Vector);
  return shear_pair(g, a * std::exp(-t), false);
}

SpectralField Background::H(const TorusGrid& g, double t) const {
  if (kind == BackgroundKind::Zero) return SpectralField(g, Rank::Vector);
  return shear_pair(g, b * std::exp(-t), true);
}

Background background_from_name(const std::string& name, double a, double b) {
  Background bg;
  if (name == "zero") {
    bg.kind = BackgroundKind::Zero;
  } else if (name == "beltrami") {
    bg.kind = BackgroundKind::Beltrami;
    bg.a = a;
    bg.b = b;
  } else {
    throw ConfigError("unknown background '" + name + "' (expected zero or beltrami)");
  }
  return bg;
}

// ----------------------------------------------------------------------------
// Norms.

double holder_seminorm(const PhysicalField& f, double kappa, int lag) {
  const TorusGrid& g = f.grid;
  if (g.d != 3) throw Error("holder_seminorm is implemented for d = 3");
  const int n = g.n;
  const int L = std::min(lag, n / 2);
  const std::size_t N = g.real_size();
  const auto& K = kernels::active();
  std::vector<double> acc(N);
  const double h = g.spacing();
  double best = 0.0;
  for (int dx = 0; dx <= L; ++dx) {
    for (int dy = -L; dy <= L; ++dy) {
      for (int dz = -L; dz <= L; ++dz) {
        // Half space of offsets: each unordered pair of points once.
        if (dx == 0 && (dy < 0 || (dy == 0 && dz <= 0))) continue;
        std::fill(acc.begin(), acc.end(), 0.0);
        const int sz = ((dz % n) + n) % n;
        for (int c = 0; c < f.ncomp; ++c) {
          const double* p = f.comp(c);
          for (int x = 0; x < n; ++x) {
            const int xs = (x + dx) % n;
            for (int y = 0; y < n; ++y) {
              const int ys = ((y + dy) % n + n) % n;
              const std::size_t row = (static_cast<std::size_t>(x) * n + y) * n;
              const std::size_t srow = (static_cast<std::size_t>(xs) * n + ys) * n;
              const std::size_t first = static_cast<std::size_t>(n - sz);
              K.sqdiff_acc(acc.data() + row, p + srow + sz, p + row, first);
              if (sz > 0) K.sqdiff_acc(acc.data() + row + first, p + srow, p + row + first, static_cast<std::size_t>(sz));
            }
          }
        }
        const double dist = h * std::sqrt(static_cast<double>(dx * dx + dy * dy + dz * dz));
        const double m = std::sqrt(K.max_abs(acc.data(), N));
        best = std::max(best, m / std::pow(dist, kappa));
      }
    }
  }
  return best;
}

namespace {

PhysicalField gradient_nodal(const SpectralField& f) {
  if (f.rank() == Rank::Vector || f.rank() == Rank::Scalar) return to_physical(grad(f));
  if (f.rank() != Rank::Tensor) throw Error("gradient_nodal: unsupported rank");
  const int d = f.grid().d;
  PhysicalField out;
  out.grid = f.grid();
  out.rank = Rank::Tensor;
  out.ncomp = d * d * d;
  out.data.reserve(static_cast<std::size_t>(out.ncomp) * f.grid().real_size());
  for (int a = 0; a < d; ++a) {
    SpectralField row(f.grid(), Rank::Vector);
    for (int b = 0; b < d; ++b) row.set_component(b, f.component(a * d + b));
    const PhysicalField g = to_physical(grad(row));
    out.data.insert(out.data.end(), g.data.begin(), g.data.end());
  }
  return out;
}

}  // namespace

NormPieces norm_pieces(const SpectralField& f, double kappa, int lag) {
  NormPieces p;
  p.sup = sup_norm(f);
  const PhysicalField g = gradient_nodal(f);
  p.grad_sup = sup_norm(g);
  p.grad_holder = p.grad_sup > 0.0 ? holder_seminorm(g, kappa, lag) : 0.0;
  return p;
}

namespace {

double x_weight_sum(const NormPieces& p, double t, double alpha) {
  return std::pow(t, 0.5 * (1.0 - alpha)) * p.sup + std::pow(t, 0.5 * (2.0 - alpha)) * (p.grad_sup + p.grad_holder);
}

double y_weight_sum(const NormPieces& p, double t, double alpha) {
  return std::pow(t, 1.0 - alpha) * p.sup + std::pow(t, 1.5 - alpha) * (p.grad_sup + p.grad_holder);
}

}  // namespace

XYNorms xy_norm(const std::vector<double>& times, const std::vector<SpectralField>& fields, double alpha,
                double kappa, int lag) {
  if (times.size() != fields.size()) throw Error("xy_norm: times and fields differ in length");
  XYNorms r;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw NegativeTime("xy_norm: sample times must be positive");
    const NormPieces p = norm_pieces(fields[i], kappa, lag);
    r.x_norm = std::max(r.x_norm, x_weight_sum(p, times[i], alpha));
    r.y_norm = std::max(r.y_norm, y_weight_sum(p, times[i], alpha));
  }
  return r;
}

// ----------------------------------------------------------------------------
// Picard iteration.

namespace {

struct Coefficients {
  PhysicalField vt, ht;    ///< v~ and h~ at the nodes
  SpectralField G_u, G_B;  ///< Psi(0, 0)
};

Coefficients coefficients_at(const TimeFields& pr, const Background& bg, const TorusGrid& g, double t) {
  Coefficients c;
  const SpectralField v = pr.v(t), h = pr.h(t);
  const ForcingPair f = pr.f(t);
  c.G_u = f.f_u;
  c.G_B = f.f_B;
  if (!bg.is_zero()) {
    const SpectralField U = bg.U(g, t), H = bg.H(g, t);
    // 2 U sym v - 2 H sym h
    c.G_u += outer(U, v);
    c.G_u += outer(v, U);
    c.G_u -= outer(H, h);
    c.G_u -= outer(h, H);
    c.G_B += outer(U, h);
    c.G_B += outer(v, H);
    c.G_B -= outer(H, v);
    c.G_B -= outer(h, U);
    c.vt = to_physical(U + v);
    c.ht = to_physical(H + h);
  } else {
    c.vt = to_physical(v);
    c.ht = to_physical(h);
  }
  return c;
}

struct Pair {
  SpectralField W, Z;
};

Pair zero_pair(const TorusGrid& g) { return {SpectralField(g, Rank::Vector), SpectralField(g, Rank::Vector)}; }

// Right-hand side of the linear system driven by Psi(Wp, Zp).
Pair rhs(const Coefficients& c, const Pair& y, const Pair* prev) {
  const TorusGrid& g = y.W.grid();
  const std::size_t n = g.real_size();
  const PhysicalField W = to_physical(y.W), Z = to_physical(y.Z);
  PhysicalField Wp, Zp;
  if (prev) {
    Wp = to_physical(prev->W);
    Zp = to_physical(prev->Z);
  }
  PhysicalField Tu(g, Rank::Tensor), TB(g, Rank::Tensor);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double* tu = Tu.comp(a * 3 + b);
      double* tb = TB.comp(a * 3 + b);
      const double *va = c.vt.comp(a), *vb = c.vt.comp(b), *ha = c.ht.comp(a), *hb = c.ht.comp(b);
      const double *Wa = W.comp(a), *Wb = W.comp(b), *Za = Z.comp(a), *Zb = Z.comp(b);
      for (std::size_t i = 0; i < n; ++i) {
        tu[i] = (va[i] * Wb[i] + Wa[i] * vb[i]) - (ha[i] * Zb[i] + Za[i] * hb[i]);
        tb[i] = (va[i] * Zb[i] - Za[i] * vb[i]) + (Wa[i] * hb[i] - ha[i] * Wb[i]);
      }
      if (prev) {
        const double *pa = Wp.comp(a), *pb = Wp.comp(b), *qa = Zp.comp(a), *qb = Zp.comp(b);
        for (std::size_t i = 0; i < n; ++i) {
          tu[i] += pa[i] * pb[i] - qa[i] * qb[i];
          tb[i] += pa[i] * qb[i] - qa[i] * pb[i];
        }
      }
    }
  }
  SpectralField su = to_spectral(Tu, true), sb = to_spectral(TB, true);
  su += c.G_u;
  sb += c.G_B;
  Pair out{leray(div(su)), leray(div(sb))};
  out.W *= -1.0;
  out.Z *= -1.0;
  return out;
}

Pair heat_pair(const Pair& p, double s) { return {heat(p.W, s), heat(p.Z, s)}; }

void axpy_pair(Pair& out, double s, const Pair& x) {
  out.W.axpy(s, x.W);
  out.Z.axpy(s, x.Z);
}

struct Sample {
  double t;
  Pair y;
};

// Lagrange interpolation through the stored samples.
Pair interpolate(const std::deque<Sample>& ring, double t) {
  for (const auto& s : ring)
    if (s.t == t) return s.y;
  Pair out = zero_pair(ring.front().y.W.grid());
  for (std::size_t i = 0; i < ring.size(); ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < ring.size(); ++j)
      if (j != i) w *= (t - ring[j].t) / (ring[i].t - ring[j].t);
    axpy_pair(out, w, ring[i].y);
  }
  return out;
}

struct Distance {
  double w = 0.0, z = 0.0;
  double total() const { return w + z; }
};

}  // namespace

PicardReport picard_iterate(const TimeFields& principal, const TorusGrid& g, const CorrectorOptions& opt) {
  if (!(opt.t_start > 0.0)) throw NegativeTime("picard_iterate: t_start must be positive");
  if (opt.iterates < 1) throw Error("picard_iterate: need at least one iterate");
  if (g.d != 3) throw Error("picard_iterate: the corrector is implemented for d = 3");
  PicardReport rep;
  rep.t_start = opt.t_start;
  rep.T_bar = std::min(opt.horizon, 4.0);
  if (!(rep.T_bar > opt.t_start)) throw Error("picard_iterate: horizon must exceed t_start");

  // Step rule: geometric growth, capped by a quarter of the fastest grid
  // mode time scale and by an advective bound from the coefficients.
  const int Kb = g.band();
  const double cap = 1.0 / (4.0 * Kb * Kb);
  const double growth = std::exp2(1.0 / opt.steps_per_octave) - 1.0;
  std::vector<double> times{opt.t_start};
  const double sample_factor = std::exp2(1.0 / opt.norm_per_octave);
  double next_sample = opt.t_start * sample_factor;

  const int M = opt.iterates + 1;
  std::vector<std::deque<Sample>> ring(static_cast<std::size_t>(M) + 1);
  for (auto& r : ring) r.push_back({opt.t_start, zero_pair(g)});
  std::vector<Distance> dist(static_cast<std::size_t>(M));
  Distance last_norm;
  double div_max = 0.0, grad_max = 0.0;
  if (opt.keep_final) {
    rep.state.times.push_back(opt.t_start);
    rep.state.w.push_back(SpectralField(g, Rank::Vector));
    rep.state.zeta.push_back(SpectralField(g, Rank::Vector));
  }

  Coefficients c_lo = coefficients_at(principal, opt.background, g, times[0]);
  for (std::size_t n = 0; times.back() < rep.T_bar * (1.0 - 1e-14); ++n) {
    const double t = times[n];
    const double speed = sup_norm(c_lo.vt) + sup_norm(c_lo.ht);
    double h = std::min(t * growth, cap);
    if (speed > 0.0) h = std::min(h, opt.cfl / (Kb * speed));
    if (t + h > rep.T_bar || rep.T_bar - (t + h) < 1e-3 * h) h = rep.T_bar - t;
    times.push_back(t + h);
    rep.max_step = std::max(rep.max_step, h);
    rep.min_step = n == 0 ? h : std::min(rep.min_step, h);
    const Coefficients c_mid = coefficients_at(principal, opt.background, g, t + 0.5 * h);
    Coefficients c_hi = coefficients_at(principal, opt.background, g, t + h);
    for (int m = 1; m <= M; ++m) {
      const auto& pr = ring[static_cast<std::size_t>(m - 1)];
      const bool has_prev = m > 1;
      Pair p1, p2, p3;
      if (has_prev) {
        p1 = interpolate(pr, t);
        p2 = interpolate(pr, t + 0.5 * h);
        p3 = interpolate(pr, t + h);
      }
      const Pair& y = ring[static_cast<std::size_t>(m)].back().y;
      const Pair a = rhs(c_lo, y, has_prev ? &p1 : nullptr);
      Pair y2 = y;
      axpy_pair(y2, 0.5 * h, a);
      y2 = heat_pair(y2, 0.5 * h);
      const Pair b = rhs(c_mid, y2, has_prev ? &p2 : nullptr);
      Pair y3 = heat_pair(y, 0.5 * h);
      axpy_pair(y3, 0.5 * h, b);
      const Pair cc = rhs(c_mid, y3, has_prev ? &p2 : nullptr);
      Pair y4 = heat_pair(y, h);
      axpy_pair(y4, h, heat_pair(cc, 0.5 * h));
      const Pair d = rhs(c_hi, y4, has_prev ? &p3 : nullptr);
      Pair next = heat_pair(y, h);
      axpy_pair(next, h / 6.0, heat_pair(a, h));
      Pair bc = b;
      axpy_pair(bc, 1.0, cc);
      axpy_pair(next, h / 3.0, heat_pair(bc, 0.5 * h));
      axpy_pair(next, h / 6.0, d);
      auto& rm = ring[static_cast<std::size_t>(m)];
      rm.push_back({t + h, std::move(next)});
      if (rm.size() > 4) rm.pop_front();
    }
    const double tn = times[n + 1];
    if (opt.keep_final) {
      rep.state.times.push_back(tn);
      rep.state.w.push_back(ring[static_cast<std::size_t>(M)].back().y.W);
      rep.state.zeta.push_back(ring[static_cast<std::size_t>(M)].back().y.Z);
    }
    const bool last_step = tn >= rep.T_bar * (1.0 - 1e-14);
    bool is_sample = last_step;
    if (tn >= next_sample * (1.0 - 1e-12)) {
      is_sample = true;
      while (next_sample <= tn * (1.0 + 1e-12)) next_sample *= sample_factor;
    }
    if (is_sample) {
      rep.norm_times.push_back(tn);
      for (int m = 1; m <= M; ++m) {
        const Pair& cur = ring[static_cast<std::size_t>(m)].back().y;
        const Pair& prv = ring[static_cast<std::size_t>(m - 1)].back().y;
        const NormPieces pw = norm_pieces(cur.W - prv.W, opt.kappa, opt.lag);
        const NormPieces pz = norm_pieces(cur.Z - prv.Z, opt.kappa, opt.lag);
        auto& dm = dist[static_cast<std::size_t>(m - 1)];
        dm.w = std::max(dm.w, x_weight_sum(pw, tn, opt.alpha));
        dm.z = std::max(dm.z, x_weight_sum(pz, tn, opt.alpha));
      }
      const Pair& last = ring[static_cast<std::size_t>(M - 1)].back().y;
      last_norm.w = std::max(last_norm.w, x_weight_sum(norm_pieces(last.W, opt.kappa, opt.lag), tn, opt.alpha));
      last_norm.z = std::max(last_norm.z, x_weight_sum(norm_pieces(last.Z, opt.kappa, opt.lag), tn, opt.alpha));
      const Pair& fin = ring[static_cast<std::size_t>(M)].back().y;
      div_max = std::max(div_max, l2_norm(div(fin.W)));
      grad_max = std::max(grad_max, l2_norm(grad(fin.W)));
      rep.source_y_norm = std::max(rep.source_y_norm, y_weight_sum(norm_pieces(c_hi.G_u, opt.kappa, opt.lag), tn, opt.alpha) +
                                                          y_weight_sum(norm_pieces(c_hi.G_B, opt.kappa, opt.lag), tn, opt.alpha));
    }
    c_lo = std::move(c_hi);
  }

  rep.steps = static_cast<int>(times.size()) - 1;
  for (const auto& d : dist) rep.distances.push_back(d.total());
  for (std::size_t m = 0; m + 1 < rep.distances.size(); ++m)
    rep.ratios.push_back(rep.distances[m] > 0.0 ? rep.distances[m + 1] / rep.distances[m] : 0.0);
  rep.last_x_norm = last_norm.total();
  rep.fixed_point_residual = rep.last_x_norm > 0.0 ? rep.distances.back() / rep.last_x_norm : rep.distances.back();
  rep.divergence = grad_max > 0.0 ? div_max / grad_max : div_max;
  rep.ratios_below_half = true;
  rep.monotone = true;
  // ratios[m] compares iterate m+2 with m+1; "after iterate 2" starts at m = 1.
  for (std::size_t m = 1; m < rep.ratios.size(); ++m) {
    if (!(rep.ratios[m] <= 0.5)) rep.ratios_below_half = false;
    if (m >= 2 && !(rep.ratios[m] <= rep.ratios[m - 1])) rep.monotone = false;
  }
  if (opt.keep_final) {
    rep.state.background = opt.background;
    rep.state.T_bar = rep.T_bar;
  }

  int run = 0;
  bool diverged = false;
  for (double r : rep.ratios) {
    run = (!(r <= 1.0)) ? run + 1 : 0;
    if (run >= 3) diverged = true;
  }
  for (double d : rep.distances)
    if (!std::isfinite(d)) diverged = true;
  if (diverged && opt.stop_on_divergence) {
    std::ostringstream os;
    os.precision(6);
    os << "X-distance ratios exceed 1 for 3 consecutive iterates:";
    for (double r : rep.ratios) os << ' ' << r;
    throw DivergenceDetected(os.str());
  }
  return rep;
}

// ----------------------------------------------------------------------------
// Assembly.

SpectralField rescale_field(const SpectralField& f, int N0) {
  if (N0 < 1) throw IncompatibleRescale("N0 must be a positive integer");
  if (N0 == 1) return f;
  const TorusGrid& g = f.grid();
  const ModeTables& mt = modes(g);
  SpectralField out(g, f.rank());
  const std::size_t S = f.modes_per_comp();
  for (std::size_t i = 0; i < S; ++i) {
    bool any = false;
    for (int c = 0; c < f.ncomp(); ++c)
      if (f.comp(c)[i] != cplx(0.0, 0.0)) any = true;
    if (!any) continue;
    int kv[3] = {0, 0, 0};
    for (int a = 0; a < g.d; ++a) kv[a] = N0 * mt.ik[a][i];
    std::size_t j = 0;
    bool conj = false;
    bool fits = mode_index(g, kv, j, conj);
    for (int a = 0; a < g.d && fits; ++a)
      if (std::abs(kv[a]) > g.band()) fits = false;
    if (!fits) throw IncompatibleRescale("mode scaled by N0 = " + std::to_string(N0) + " leaves the grid band");
    for (int c = 0; c < f.ncomp(); ++c) {
      const cplx v = static_cast<double>(N0) * f.comp(c)[i];
      out.comp(c)[j] = conj ? std::conj(v) : v;
    }
  }
  return out;
}

AssembledSolution assemble_solution(const TimeFields& principal, const CorrectorState& corrector, int N0,
                                    const Background& background) {
  if (N0 < 1) throw IncompatibleRescale("N0 must be a positive integer");
  if (corrector.times.size() != corrector.w.size() || corrector.times.size() != corrector.zeta.size())
    throw Error("assemble_solution: corrector samples are inconsistent");
  AssembledSolution s;
  const double n2 = static_cast<double>(N0) * N0;
  for (std::size_t i = 0; i < corrector.times.size(); ++i) {
    const double tw = corrector.times[i];
    const TorusGrid& g = corrector.w[i].grid();
    SpectralField u = principal.v(tw) + corrector.w[i];
    SpectralField B = principal.h(tw) + corrector.zeta[i];
    if (u.grid() != g) throw IncompatibleRescale("principal and corrector grids differ");
    u += background.U(g, tw);
    B += background.H(g, tw);
    s.times.push_back(tw / n2);
    s.u.push_back(rescale_field(u, N0));
    s.B.push_back(rescale_field(B, N0));
  }
  return s;
}

double end_to_end_residual(const AssembledSolution& s) {
  auto lookup = [&s](const std::vector<SpectralField>& fs) {
    return [&s, &fs](double t) {
      auto it = std::lower_bound(s.times.begin(), s.times.end(), t);
      if (it == s.times.end() || *it != t) throw Error("end_to_end_residual: time not sampled");
      return fs[static_cast<std::size_t>(it - s.times.begin())];
    };
  };
  TimeFields f;
  f.v = lookup(s.u);
  f.h = lookup(s.B);
  f.f = [&s](double) {
    const TorusGrid& g = s.u.front().grid();
    return ForcingPair{SpectralField(g, Rank::Tensor), SpectralField(g, Rank::Tensor)};
  };
  const auto res = residual_on_samples(f, s.times);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < res.size(); ++i) num = std::max(num, std::max(res[i].first, res[i].second));
  for (const auto& u : s.u) den = std::max(den, l2_norm(laplacian(u)));
  return den > 0.0 ? num / den : num;
}

}  // namespace mhdc
