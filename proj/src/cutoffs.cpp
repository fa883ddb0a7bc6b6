// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "mhdc/blocks.hpp"
#include "mhdc/errors.hpp"

namespace mhdc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 to_vec(const IVec3& v) {
  return {static_cast<double>(v[0]), static_cast<double>(v[1]), static_cast<double>(v[2])};
}

IVec3 cross(const IVec3& a, const IVec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

long idot(const IVec3& a, const IVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double smooth_e(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// 1 for t <= 0, 0 for t >= 1, C-infinity in between.
double smooth_down(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double a = smooth_e(1.0 - t), b = smooth_e(t);
  return a / (a + b);
}

}  // namespace

IVec3 primitive_direction(const QVec3& eta) {
  long l = 1;
  for (const auto& x : eta) l = std::lcm(l, x.get_den().get_si());
  IVec3 p{};
  long g = 0;
  for (int i = 0; i < 3; ++i) {
    const mpq_class v = eta[i] * l;
    p[i] = v.get_num().get_si();
    g = std::gcd(g, std::abs(p[i]));
  }
  if (g == 0) throw Error("primitive_direction: zero vector");
  for (auto& v : p) v /= g;
  return p;
}

CylinderFamily make_family(const Frame& f, const Vec3& offset) {
  CylinderFamily fam;
  fam.frame = f;
  fam.p = primitive_direction(f.eta);
  fam.plen = std::sqrt(static_cast<double>(idot(fam.p, fam.p)));
  fam.offset = offset;
  const long box = static_cast<long>(std::ceil(fam.plen)) + 1;
  std::vector<IVec3> cand;
  for (long a = -box; a <= box; ++a)
    for (long b = -box; b <= box; ++b)
      for (long c = -box; c <= box; ++c) {
        const IVec3 m{a, b, c};
        if ((a || b || c) && idot(m, fam.p) == 0) cand.push_back(m);
      }
  auto len2 = [](const IVec3& m) { return idot(m, m); };
  std::stable_sort(cand.begin(), cand.end(), [&](const IVec3& x, const IVec3& y) { return len2(x) < len2(y); });
  if (cand.empty()) throw Error("make_family: no orthogonal modes found");
  fam.m1 = cand.front();
  const long p2 = idot(fam.p, fam.p);
  bool found = false;
  for (const auto& m : cand) {
    const IVec3 c = cross(fam.m1, m);
    if (idot(c, c) == p2) {
      fam.m2 = m;
      found = true;
      break;
    }
  }
  if (!found) throw Error("make_family: no lattice basis found");
  // Dual basis: d_i = sum_j Ginv_ij m_j.
  const double g11 = static_cast<double>(idot(fam.m1, fam.m1));
  const double g12 = static_cast<double>(idot(fam.m1, fam.m2));
  const double g22 = static_cast<double>(idot(fam.m2, fam.m2));
  const double det = g11 * g22 - g12 * g12;
  const Vec3 a = to_vec(fam.m1), b = to_vec(fam.m2);
  for (int i = 0; i < 3; ++i) {
    fam.d1[i] = (g22 * a[i] - g12 * b[i]) / det;
    fam.d2[i] = (-g12 * a[i] + g11 * b[i]) / det;
  }
  return fam;
}

double CylinderFamily::distance(const Vec3& y) const {
  Vec3 w{y[0] - offset[0], y[1] - offset[1], y[2] - offset[2]};
  const Vec3 pv = to_vec(p);
  const double s = dot3(w, pv) / (plen * plen);
  for (int i = 0; i < 3; ++i) w[i] -= s * pv[i];
  const double a1 = dot3(w, to_vec(m1)) / kTwoPi;
  const double a2 = dot3(w, to_vec(m2)) / kTwoPi;
  const double f1 = std::floor(a1), f2 = std::floor(a2);
  double best = std::numeric_limits<double>::infinity();
  for (int i = -1; i <= 2; ++i)
    for (int j = -1; j <= 2; ++j) {
      const double n1 = f1 + i, n2 = f2 + j;
      double r2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double v = w[c] - kTwoPi * (n1 * d1[c] + n2 * d2[c]);
        r2 += v * v;
      }
      best = std::min(best, r2);
    }
  return std::sqrt(best);
}

double CylinderFamily::self_spacing() const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j) {
      if (!i && !j) continue;
      double r2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double v = kTwoPi * (i * d1[c] + j * d2[c]);
        r2 += v * v;
      }
      best = std::min(best, r2);
    }
  return std::sqrt(best);
}

double family_distance(const CylinderFamily& a, const CylinderFamily& b) {
  const IVec3 n = cross(a.p, b.p);
  if (n[0] == 0 && n[1] == 0 && n[2] == 0) return a.distance(b.offset);
  const long g = std::gcd(std::gcd(std::abs(n[0]), std::abs(n[1])), std::abs(n[2]));
  const Vec3 nv = to_vec(n);
  const Vec3 dv{b.offset[0] - a.offset[0], b.offset[1] - a.offset[1], b.offset[2] - a.offset[2]};
  const double s = dot3(dv, nv);
  const double period = kTwoPi * static_cast<double>(g);
  const double r = s - period * std::round(s / period);
  return std::abs(r) / std::sqrt(dot3(nv, nv));
}

namespace {

double layout_min_distance(const std::vector<CylinderFamily>& fams) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fams.size(); ++i) {
    best = std::min(best, fams[i].self_spacing());
    for (std::size_t j = i + 1; j < fams.size(); ++j) best = std::min(best, family_distance(fams[i], fams[j]));
  }
  return best;
}

double family_min_distance(const std::vector<CylinderFamily>& fams, std::size_t i) {
  double best = fams[i].self_spacing();
  for (std::size_t j = 0; j < fams.size(); ++j)
    if (j != i) best = std::min(best, family_distance(fams[i], fams[j]));
  return best;
}

}  // namespace

CutoffLayout plan_cutoffs(const std::vector<Frame>& frames, int J_d, std::uint64_t seed,
                          std::optional<double> delta0_override) {
  CutoffLayout lay;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  std::vector<CylinderFamily> best;
  double best_d = -1.0;
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<CylinderFamily> fams;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      Vec3 o{0.0, 0.0, 0.0};
      if (i > 0) o = {uni(rng), uni(rng), uni(rng)};
      fams.push_back(make_family(frames[i], o));
    }
    const double d = layout_min_distance(fams);
    if (d > best_d) {
      best_d = d;
      best = fams;
    }
  }
  // Local refinement: move the family that attains the minimum.
  std::normal_distribution<double> gauss(0.0, 1.0);
  double step = 0.5;
  for (int it = 0; it < 4000 && !best.empty(); ++it) {
    std::size_t worst = 0;
    double wd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < best.size(); ++i) {
      const double d = family_min_distance(best, i);
      if (d < wd) {
        wd = d;
        worst = i;
      }
    }
    if (worst == 0) break;
    auto trial = best;
    for (auto& x : trial[worst].offset) x = std::fmod(x + step * gauss(rng) + 4.0 * kTwoPi, kTwoPi);
    const double d = layout_min_distance(trial);
    if (d > best_d) {
      best_d = d;
      best = std::move(trial);
    } else if (it % 200 == 199) {
      step *= 0.7;
    }
  }
  lay.families = std::move(best);
  lay.min_distance = best_d;
  double max_plen = 0.0;
  for (const auto& f : lay.families) max_plen = std::max(max_plen, f.plen);
  const double vol_cap = 1.0 / (10.0 * J_d);
  double d0 = 1.0;
  for (int m = 0; m < 60; ++m, d0 *= 0.5) {
    const double rho = 4.0 * d0;
    const bool vol = rho * rho * max_plen / (4.0 * std::numbers::pi) <= vol_cap;
    const bool dis = best_d > 2.0 * rho;
    if (vol && dis) break;
  }
  lay.delta0_computed = d0;
  lay.delta0 = delta0_override ? *delta0_override : d0;
  lay.overridden = delta0_override.has_value();
  const double rho = 4.0 * lay.delta0;
  lay.max_volume_fraction = rho * rho * max_plen / (4.0 * std::numbers::pi);
  lay.volume_ok = lay.max_volume_fraction <= vol_cap;
  lay.disjoint_ok = best_d > 2.0 * rho;
  return lay;
}

double cutoff_profile(double s) {
  if (s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

namespace {

// Two-dimensional Fourier transform of the radial bump of radius rho at |m| = kappa.
double hankel_profile(double kappa, double rho) {
  const int n = 2000;
  const double h = 1.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * cutoff_profile(x) * std::cyl_bessel_j(0.0, kappa * rho * x) * x;
  }
  return 2.0 * std::numbers::pi * rho * rho * s * h / 3.0;
}

}  // namespace

SpectralField build_cylinder_cutoff(const CylinderFamily& fam, long M, double delta0, const TorusGrid& g,
                                    const std::array<int, 3>& caps, CutoffReport* rep) {
  if (g.d != 3) throw Error("build_cylinder_cutoff: three-dimensional grid required");
  for (int a = 0; a < 3; ++a)
    if (caps[a] < M || caps[a] > g.band())
      throw GridTooCoarse("cutoff cap " + std::to_string(caps[a]) + " on axis " + std::to_string(a) +
                          " must lie between M = " + std::to_string(M) + " and the grid band " +
                          std::to_string(g.band()));
  const long b0 = caps[0] / M, b1 = caps[1] / M, b2 = caps[2] / M;
  struct Mode {
    IVec3 m;
    cplx c;
  };
  std::vector<Mode> list;
  double norm2 = 0.0;
  for (long x = -b0; x <= b0; ++x)
    for (long y = -b1; y <= b1; ++y)
      for (long z = -b2; z <= b2; ++z) {
        const IVec3 m{x, y, z};
        if (idot(m, fam.p) != 0) continue;
        const double kappa = std::sqrt(static_cast<double>(idot(m, m)));
        const double amp = fam.plen / (kTwoPi * kTwoPi) * hankel_profile(kappa, delta0);
        const double ph = -(m[0] * fam.offset[0] + m[1] * fam.offset[1] + m[2] * fam.offset[2]);
        const cplx c = amp * cplx(std::cos(ph), std::sin(ph));
        list.push_back({m, c});
        norm2 += std::norm(c);
      }
  const double scale = std::sqrt(2.0 / norm2);
  SpectralField phi(g, Rank::Scalar);
  for (const auto& md : list) {
    const int kv[3] = {static_cast<int>(M * md.m[0]), static_cast<int>(M * md.m[1]), static_cast<int>(M * md.m[2])};
    std::size_t idx;
    bool conj;
    if (!mode_index(g, kv, idx, conj)) continue;
    if (!conj) phi.comp(0)[idx] = scale * md.c;
  }
  if (rep) {
    rep->modes = list.size();
    const double l2 = l2_norm(phi);
    rep->normalization = 0.5 * l2 * l2;
    SpectralField dir(g, Rank::Vector);
    const auto e = to_double(fam.frame.eta);
    for (int a = 0; a < 3; ++a) dir.set_component(a, e[a] * phi);
    rep->axis_derivative = sup_norm(div(dir));
    const PhysicalField p = to_physical(phi);
    const double h = g.spacing();
    double inside = 0.0, outside = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        for (int l = 0; l < g.n; ++l, ++idx) {
          const Vec3 y{M * i * h, M * j * h, M * l * h};
          const double v = std::abs(p.comp(0)[idx]);
          if (fam.distance(y) < delta0) inside = std::max(inside, v);
          else outside = std::max(outside, v);
        }
    rep->leakage = inside > 0.0 ? outside / inside : outside;
    rep->volume_fraction = fam.volume_fraction(delta0);
    const auto sups = derivative_sups(phi);
    rep->grad_ratios.assign(5, 0.0);
    for (int n = 0; n < 5; ++n) rep->grad_ratios[n] = sups[n] / std::pow(static_cast<double>(M), n);
  }
  return phi;
}

SpectralField build_cylinder_cutoff(const Frame& frame, long M, double delta0, const TorusGrid& g,
                                    CutoffReport* rep) {
  const int K = g.band();
  return build_cylinder_cutoff(make_family(frame, {0.0, 0.0, 0.0}), M, delta0, g, {K, K, K}, rep);
}

std::vector<double> union_distance_ratio(const LevelSupport& s, const TorusGrid& g) {
  if (!s.layout) throw Error("union_distance_ratio: missing layout");
  std::vector<double> r(g.real_size(), std::numeric_limits<double>::infinity());
  const double h = g.spacing();
  const double inv = 1.0 / s.layout->delta0;
  std::size_t idx = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      for (int l = 0; l < g.n; ++l, ++idx) {
        const Vec3 y{s.M * i * h, s.M * j * h, s.M * l * h};
        double best = std::numeric_limits<double>::infinity();
        for (const auto& f : s.layout->families) best = std::min(best, f.distance(y));
        r[idx] = best * inv;
      }
  return r;
}

SpectralField build_chi(int k, const std::vector<LevelSupport>& levels, const TorusGrid& g,
                        std::vector<double>* nodal) {
  if (k < 1) throw Error("build_chi: k must be at least 1");
  std::vector<double> chi(g.real_size(), 1.0);
  for (int kp = 1; kp <= k - 1; ++kp) {
    if (kp > static_cast<int>(levels.size())) throw Error("build_chi: missing level support");
    const auto r = union_distance_ratio(levels[kp - 1], g);
    const double shift = std::ldexp(1.0, -(k - 1 - kp));
    const double rin = 3.0 - shift, rout = 3.0 - 0.75 * shift;
    for (std::size_t i = 0; i < chi.size(); ++i) chi[i] *= smooth_down((r[i] - rin) / (rout - rin));
  }
  PhysicalField p(g, Rank::Scalar);
  std::copy(chi.begin(), chi.end(), p.comp(0));
  if (nodal) *nodal = chi;
  return to_spectral(p);
}

std::vector<std::uint8_t> omega_indicator(int k, const std::vector<LevelSupport>& levels, const TorusGrid& g,
                                          bool tilde) {
  std::vector<std::uint8_t> in(g.real_size(), 1);
  for (int kp = 1; kp <= k; ++kp) {
    const auto r = union_distance_ratio(levels[kp - 1], g);
    const double shift = std::ldexp(1.0, -(k - kp));
    const double rho = tilde ? 3.0 - 0.75 * shift : 3.0 - shift;
    for (std::size_t i = 0; i < in.size(); ++i)
      if (!(r[i] < rho)) in[i] = 0;
  }
  return in;
}

SpectralField mollify(const SpectralField& f, double ell) {
  const double s = 0.5 * ell * ell;
  return apply_radial(f, [s](double k2) { return std::exp(-s * k2); });
}

SpectralField modulate_sin(const SpectralField& f, const IVec3& q) {
  const TorusGrid& g = f.grid();
  const ModeTables& mt = modes(g);
  SpectralField out(g, f.rank());
  const std::size_t S = g.spec_size();
  const cplx half_over_i(0.0, -0.5);
  for (std::size_t i = 0; i < S; ++i) {
    if (mt.nyquist[i]) continue;
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int a = 0; a < g.d; ++a) {
      lo[a] = mt.ik[a][i] - static_cast<int>(q[a]);
      hi[a] = mt.ik[a][i] + static_cast<int>(q[a]);
    }
    std::size_t il = 0, ih = 0;
    bool cl = false, ch = false;
    const bool okl = mode_index(g, lo, il, cl);
    const bool okh = mode_index(g, hi, ih, ch);
    for (int c = 0; c < f.ncomp(); ++c) {
      const cplx* src = f.comp(c);
      cplx a(0.0, 0.0), b(0.0, 0.0);
      if (okl) a = cl ? std::conj(src[il]) : src[il];
      if (okh) b = ch ? std::conj(src[ih]) : src[ih];
      out.comp(c)[i] = half_over_i * (a - b);
    }
  }
  return out;
}

SpectralField truncate_box(const SpectralField& f, const std::array<int, 3>& caps) {
  const TorusGrid& g = f.grid();
  const ModeTables& mt = modes(g);
  SpectralField out = f;
  for (std::size_t i = 0; i < g.spec_size(); ++i) {
    bool keep = !mt.nyquist[i];
    for (int a = 0; a < g.d && keep; ++a)
      if (std::abs(mt.ik[a][i]) > caps[a]) keep = false;
    if (!keep)
      for (int c = 0; c < f.ncomp(); ++c) out.comp(c)[i] = cplx(0.0, 0.0);
  }
  return out;
}

std::array<double, 5> derivative_sups(const SpectralField& f) {
  std::array<double, 5> s{};
  for (int n = 0; n < 5; ++n) {
    const double e = 0.5 * n;
    s[n] = sup_norm(n == 0 ? f : apply_radial(f, [e](double k2) { return std::pow(k2, e); }));
  }
  return s;
}

}  // namespace mhdc
