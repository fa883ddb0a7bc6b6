// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <cmath>
#include <limits>

#include "mhdc/blocks.hpp"
#include "mhdc/errors.hpp"
#include "mhdc/kernels.hpp"

namespace mhdc {

namespace {

IVec3 scaled_wavevector(const mpz_class& N, const QVec3& eta) {
  IVec3 q{};
  for (int a = 0; a < 3; ++a) {
    const mpq_class v = mpq_class(N) * eta[a];
    if (v.get_den() != 1) throw Error("wavevector N eta is not integral");
    if (!v.get_num().fits_slong_p()) throw GridTooCoarse("wavevector too large");
    q[a] = v.get_num().get_si();
  }
  return q;
}

SpectralField vector_along(const SpectralField& s, const Vec3& e, double scale) {
  SpectralField v(s.grid(), Rank::Vector);
  for (int a = 0; a < 3; ++a) {
    if (e[a] == 0.0) continue;
    SpectralField c = s;
    c *= scale * e[a];
    v.set_component(a, c);
  }
  return v;
}

// Accumulates w * (u (x) v) into a nodal 3x3 tensor.
void add_outer(std::vector<std::vector<double>>& T, const std::vector<double>& w, const Vec3& u, const Vec3& v,
               double sign) {
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double f = sign * u[a] * v[b];
      if (f == 0.0) continue;
      auto& t = T[a * 3 + b];
      for (std::size_t i = 0; i < w.size(); ++i) t[i] += f * w[i];
    }
}

SpectralField nodal_tensor(const std::vector<std::vector<double>>& T, const TorusGrid& g) {
  PhysicalField p(g, Rank::Tensor);
  for (int c = 0; c < 9; ++c) std::copy(T[c].begin(), T[c].end(), p.comp(c));
  return to_spectral(p);
}

SpectralField nodal_scalar(const std::vector<double>& v, const TorusGrid& g) {
  PhysicalField p(g, Rank::Scalar);
  std::copy(v.begin(), v.end(), p.comp(0));
  return to_spectral(p);
}

double sum_l2(const std::vector<SpectralField>& fs) {
  double s = 0.0;
  for (const auto& f : fs) s += l2_norm(f);
  return s;
}

}  // namespace

BlockGeometry make_block_geometry(const FrameSet& lambda_u, const FrameSet& lambda_b, int J_d,
                                  std::uint64_t seed, std::optional<double> delta0_override) {
  if (lambda_b.kind != FrameKind::LambdaB16)
    throw Error("make_block_geometry: the cascade uses the coupled sixteen-frame set");
  BlockGeometry geo;
  geo.lambda_u = lambda_u;
  geo.lambda_b = lambda_b;
  geo.sym = symmetric_map(lambda_u);
  geo.coupled = coupled_map(lambda_b);
  std::vector<Frame> all = lambda_u.frames;
  all.insert(all.end(), lambda_b.frames.begin(), lambda_b.frames.end());
  geo.layout = plan_cutoffs(all, J_d, seed, delta0_override);
  return geo;
}

BlockLevel init_level0(const FrameSet& lambda_u, const TorusGrid& g) {
  if (!lambda_u.seed) throw Error("init_level0: an integer-coordinate seed frame is required");
  if (g.d != 3) throw Error("init_level0: three-dimensional grid required");
  BlockLevel L;
  L.k = 0;
  L.N = 1.0;
  L.M = 1;
  L.grid = g;
  const Frame& f = *lambda_u.seed;
  L.dirs_u = {f};
  const IVec3 q = scaled_wavevector(1, f.eta);
  const int kv[3] = {static_cast<int>(q[0]), static_cast<int>(q[1]), static_cast<int>(q[2])};
  SpectralField s = single_mode(g, Rank::Scalar, 0, kv, 1.0, false);
  SpectralField one(g, Rank::Scalar);
  one.comp(0)[0] = 1.0;
  L.a_u = {one};
  L.prof_u = {s};
  const Vec3 e1 = to_double(f.eta1);
  L.sum_u = vector_along(s, e1, 1.0);
  L.sum_c = SpectralField(g, Rank::Vector);
  L.sum_B = SpectralField(g, Rank::Vector);
  L.amp_u = SpectralField(g, Rank::Tensor);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) L.amp_u.comp(a * 3 + b)[0] = e1[a] * e1[b];
  L.amp_c = SpectralField(g, Rank::Tensor);
  L.amp_s = SpectralField(g, Rank::Tensor);
  L.chi = one;
  L.diag.psi_ratios.push_back(derivative_sups(s));
  L.diag.amp_ratios.push_back(derivative_sups(one));
  L.diag.min_gamma_u = 1.0;
  return L;
}

std::array<double, 3> identity_residuals(const BlockLevel& prev, const BlockLevel& next) {
  const SpectralField Su = 2.0 * op_D(prev.sum_u);
  const SpectralField Ssym = 2.0 * op_D(prev.sum_c);
  const SpectralField Sskw = 2.0 * op_Ds(prev.sum_B);
  auto remove_pressure = [](SpectralField e) {
    const SpectralField p = trace(e);
    e.axpy(-1.0 / 3.0, times_identity(p, 3));
    return e;
  };
  std::vector<SpectralField> a2u, a2b;
  for (const auto& a : next.a_u) a2u.push_back(multiply(a, a));
  for (const auto& a : next.a_B) a2b.push_back(multiply(a, a));
  const double du = sum_l2(a2u);
  const double db = std::sqrt(2.0) * sum_l2(a2b);
  auto rel = [](double num, double den) { return den > 0.0 ? num / den : num; };
  std::array<double, 3> r{};
  r[0] = rel(l2_norm(remove_pressure(next.amp_u - Su)), du);
  r[1] = rel(l2_norm(remove_pressure(next.amp_c - Ssym)), db);
  r[2] = rel(l2_norm(next.amp_s - Sskw), db);
  return r;
}

BlockLevel next_level(const BlockLevel& prev, const ScalePlan& plan, AmplitudeConstants& constants,
                      const BlockGeometry& geo, const std::vector<LevelSupport>& history,
                      const BuildOptions& opt) {
  const TorusGrid& g = prev.grid;
  const int k = prev.k + 1;
  if (k > plan.params.k_max) throw Error("next_level: level beyond the planned depth");
  if (static_cast<int>(history.size()) < k - 1) throw Error("next_level: missing support history");
  BlockLevel L;
  L.k = k;
  L.grid = g;
  const mpz_class& Nz = plan.n_at(1, k);
  L.N = Nz.get_d();
  L.M = plan.m_at(1, k).get_si();
  L.ell = plan.ell.at(k);
  L.dirs_u = geo.lambda_u.frames;
  L.dirs_B = geo.lambda_b.frames;
  L.layout = geo.layout;
  const std::size_t nu = L.dirs_u.size(), nb = L.dirs_B.size();
  const std::size_t nf = nu + nb;
  if (geo.layout.families.size() != nf) throw Error("next_level: cutoff layout does not match the frames");

  // Band check before any heavy work.
  const int K = g.band();
  std::vector<std::array<int, 3>> caps(nf);
  std::vector<IVec3> qs(nf);
  for (std::size_t j = 0; j < nf; ++j) {
    const Frame& f = j < nu ? L.dirs_u[j] : L.dirs_B[j - nu];
    qs[j] = scaled_wavevector(Nz, f.eta);
    for (int a = 0; a < 3; ++a) {
      caps[j][a] = K - static_cast<int>(std::abs(qs[j][a]));
      if (caps[j][a] < L.M && !opt.amplitudes_only)
        throw GridTooCoarse("level " + std::to_string(k) + " needs band " +
                            std::to_string(std::abs(qs[j][a]) + L.M) + " on axis " + std::to_string(a) +
                            ", grid band is " + std::to_string(K));
    }
  }

  // Stresses of the previous level.
  const PhysicalField Su = to_physical(2.0 * op_D(prev.sum_u));
  const PhysicalField Ssym = to_physical(2.0 * op_D(prev.sum_c));
  const PhysicalField Sskw = to_physical(2.0 * op_Ds(prev.sum_B));
  const std::size_t n = g.real_size();

  std::vector<double> chi;
  L.chi = build_chi(k, history, g, &chi);
  L.diag.chi_min = *std::min_element(chi.begin(), chi.end());

  // Coordinates at the nodes (without the factor c).
  std::vector<std::vector<double>> xu(6, std::vector<double>(n)), xb(8, std::vector<double>(n));
  double mu = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto su = [&](int a, int b) { return 0.5 * (Su.comp(a * 3 + b)[i] + Su.comp(b * 3 + a)[i]); };
    auto ss = [&](int a, int b) { return 0.5 * (Ssym.comp(a * 3 + b)[i] + Ssym.comp(b * 3 + a)[i]); };
    auto sk = [&](int a, int b) { return 0.5 * (Sskw.comp(a * 3 + b)[i] - Sskw.comp(b * 3 + a)[i]); };
    xu[0][i] = su(0, 0);
    xu[1][i] = su(1, 1);
    xu[2][i] = su(2, 2);
    xu[3][i] = su(0, 1);
    xu[4][i] = su(0, 2);
    xu[5][i] = su(1, 2);
    const double p = (ss(0, 0) + ss(1, 1) + ss(2, 2)) / 3.0;
    xb[0][i] = ss(0, 0) - p;
    xb[1][i] = ss(1, 1) - p;
    xb[2][i] = ss(0, 1);
    xb[3][i] = ss(0, 2);
    xb[4][i] = ss(1, 2);
    xb[5][i] = sk(0, 1);
    xb[6][i] = sk(0, 2);
    xb[7][i] = sk(1, 2);
    const double nu2 = xu[0][i] * xu[0][i] + xu[1][i] * xu[1][i] + xu[2][i] * xu[2][i] +
                       2.0 * (xu[3][i] * xu[3][i] + xu[4][i] * xu[4][i] + xu[5][i] * xu[5][i]);
    const double m33 = -xb[0][i] - xb[1][i];
    const double nb2 = xb[0][i] * xb[0][i] + xb[1][i] * xb[1][i] + m33 * m33 +
                       2.0 * (xb[2][i] * xb[2][i] + xb[3][i] * xb[3][i] + xb[4][i] * xb[4][i]) +
                       2.0 * (xb[5][i] * xb[5][i] + xb[6][i] * xb[6][i] + xb[7][i] * xb[7][i]);
    mu = std::max(mu, std::sqrt(nu2));
    mb = std::max(mb, std::sqrt(nb2));
  }
  double c = constants.c;
  int halvings = 0;
  while (c * mu > geo.sym.radius || c * mb > geo.coupled.radius) {
    if (halvings == 20)
      throw BallExceeded("pointwise stresses stay outside the certified balls after 20 halvings of c");
    c *= 0.5;
    ++halvings;
  }
  constants.c = c;
  constants.halvings += halvings;
  constants.c0 = geo.sym.radius;
  constants.eps_star = geo.coupled.radius;
  L.diag.c = c;
  L.diag.halvings = halvings;
  L.diag.ball_u = c * mu / geo.sym.radius;
  L.diag.ball_B = c * mb / geo.coupled.radius;
  for (auto& v : xu)
    for (auto& x : v) x *= c;
  for (auto& v : xb)
    for (auto& x : v) x *= c;

  // Pointwise coefficients and amplitudes.
  const auto& KT = kernels::active();
  std::vector<const double*> pu(6), pb(8);
  for (int i = 0; i < 6; ++i) pu[i] = xu[i].data();
  for (int i = 0; i < 8; ++i) pb[i] = xb[i].data();
  std::vector<std::vector<double>> a2(nf, std::vector<double>(n));
  double gmin_u = std::numeric_limits<double>::infinity(), gmin_b = gmin_u;
  for (std::size_t j = 0; j < nf; ++j) {
    const bool is_u = j < nu;
    const AffineMap& am = is_u ? geo.sym : geo.coupled;
    const std::size_t row = is_u ? j : j - nu;
    KT.affine(a2[j].data(), am.base[row], &am.L[row * am.nin], is_u ? pu.data() : pb.data(),
              static_cast<std::size_t>(am.nin), n);
    double gm = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) gm = std::min(gm, a2[j][i]);
    (is_u ? gmin_u : gmin_b) = std::min(is_u ? gmin_u : gmin_b, gm);
    for (std::size_t i = 0; i < n; ++i) a2[j][i] *= chi[i] * chi[i] / c;
  }
  L.diag.min_gamma_u = gmin_u;
  L.diag.min_gamma_B = gmin_b;
  xu.clear();
  xb.clear();

  // Amplitude tensors.
  {
    std::vector<std::vector<double>> Tu(9, std::vector<double>(n, 0.0)), Tc = Tu, Ts = Tu;
    for (std::size_t j = 0; j < nf; ++j) {
      const Frame& f = j < nu ? L.dirs_u[j] : L.dirs_B[j - nu];
      const Vec3 e1 = to_double(f.eta1), e2 = to_double(f.eta2);
      if (j < nu) {
        add_outer(Tu, a2[j], e1, e1, 1.0);
      } else {
        add_outer(Tc, a2[j], e1, e1, 1.0);
        add_outer(Tc, a2[j], e2, e2, -1.0);
        add_outer(Ts, a2[j], e1, e2, 1.0);
        add_outer(Ts, a2[j], e2, e1, -1.0);
      }
    }
    L.amp_u = nodal_tensor(Tu, g);
    L.amp_c = nodal_tensor(Tc, g);
    L.amp_s = nodal_tensor(Ts, g);
  }

  if (opt.amplitudes_only) {
    std::vector<double> a(n);
    for (std::size_t j = 0; j < nf; ++j) {
      for (std::size_t i = 0; i < n; ++i) a[i] = std::sqrt(std::max(0.0, a2[j][i]));
      (j < nu ? L.a_u : L.a_B).push_back(nodal_scalar(a, g));
    }
    if (opt.diagnostics) L.diag.identity_residual = identity_residuals(prev, L);
    return L;
  }

  // Support sets for the diagnostics.
  std::vector<LevelSupport> supports(history.begin(), history.begin() + (k - 1));
  supports.push_back(LevelSupport{L.M, &*L.layout});
  std::vector<std::uint8_t> omega_k, omega_prev_tilde;
  if (opt.diagnostics) {
    omega_k = omega_indicator(k, supports, g, false);
    omega_prev_tilde = omega_indicator(k - 1, supports, g, true);
    std::size_t cnt = 0;
    for (auto v : omega_k) cnt += v;
    L.diag.omega_volume = static_cast<double>(cnt) / static_cast<double>(n);
  }

  // Profiles.
  L.sum_u = SpectralField(g, Rank::Vector);
  L.sum_c = SpectralField(g, Rank::Vector);
  L.sum_B = SpectralField(g, Rank::Vector);
  const double invN = 1.0 / L.N;
  const double delta0 = geo.layout.delta0;
  std::vector<double> top1(opt.diagnostics ? n : 0, 0.0), top2(opt.diagnostics ? n : 0, 0.0);
  double psi_in = 0.0, psi_out = 0.0, amp_leak = 0.0;
  std::vector<double> a(n), prod(n);
  for (std::size_t j = 0; j < nf; ++j) {
    const bool is_u = j < nu;
    const Frame& f = is_u ? L.dirs_u[j] : L.dirs_B[j - nu];
    for (std::size_t i = 0; i < n; ++i) a[i] = std::sqrt(std::max(0.0, a2[j][i]));
    a2[j].clear();
    a2[j].shrink_to_fit();
    SpectralField aj = nodal_scalar(a, g);
    CutoffReport rep;
    const SpectralField phi =
        build_cylinder_cutoff(geo.layout.families[j], L.M, delta0, g, caps[j], opt.diagnostics ? &rep : nullptr);
    const PhysicalField pphi = to_physical(phi);
    KT.mul(prod.data(), a.data(), pphi.comp(0), n);
    PhysicalField pp(g, Rank::Scalar);
    std::copy(prod.begin(), prod.end(), pp.comp(0));
    SpectralField s = mollify(modulate_sin(truncate_box(to_spectral(pp, false), caps[j]), qs[j]), L.ell);
    const Vec3 e1 = to_double(f.eta1), e2 = to_double(f.eta2);
    if (is_u) {
      L.sum_u += vector_along(s, e1, invN);
    } else {
      L.sum_c += vector_along(s, e1, invN);
      L.sum_B += vector_along(s, e2, invN);
    }
    if (opt.diagnostics) {
      const double nm = l2_norm(modulate_sin(phi, qs[j]));
      L.diag.cutoff_normalization_error = std::max(L.diag.cutoff_normalization_error, std::abs(nm * nm - 1.0));
      L.diag.cutoff_axis_derivative = std::max(L.diag.cutoff_axis_derivative, rep.axis_derivative);
      L.diag.cutoff_leakage = std::max(L.diag.cutoff_leakage, rep.leakage);
      auto ps = derivative_sups(s);
      for (int m = 0; m < 5; ++m) ps[m] /= std::pow(L.N, m);
      L.diag.psi_ratios.push_back(ps);
      auto as = derivative_sups(aj);
      for (int m = 0; m < 5; ++m) as[m] /= std::pow(prev.N, m);
      L.diag.amp_ratios.push_back(as);
      const PhysicalField sp = to_physical(s);
      const double* v = sp.comp(0);
      for (std::size_t i = 0; i < n; ++i) {
        const double x = std::abs(v[i]);
        if (omega_k[i]) psi_in = std::max(psi_in, x);
        else psi_out = std::max(psi_out, x);
        if (!omega_prev_tilde[i]) amp_leak = std::max(amp_leak, a[i]);
        if (x > top1[i]) {
          top2[i] = top1[i];
          top1[i] = x;
        } else if (x > top2[i]) {
          top2[i] = x;
        }
      }
    }
    if (is_u) L.a_u.push_back(std::move(aj));
    else L.a_B.push_back(std::move(aj));
    if (opt.keep_profiles) (is_u ? L.prof_u : L.prof_B).push_back(std::move(s));
  }
  if (opt.diagnostics) {
    double smax = 0.0, ov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      smax = std::max(smax, top1[i]);
      ov = std::max(ov, top1[i] * top2[i]);
    }
    L.diag.psi_leakage = psi_in > 0.0 ? psi_out / psi_in : psi_out;
    L.diag.pair_overlap = smax > 0.0 ? ov / (smax * smax) : 0.0;
    L.diag.amplitude_support_leak = amp_leak;
    L.diag.identity_residual = identity_residuals(prev, L);
  }
  return L;
}

std::vector<BoundsRow> bounds_report(const BlockLevel& level) {
  std::vector<BoundsRow> rows;
  const std::size_t nu = level.dirs_u.size();
  for (std::size_t j = 0; j < level.diag.psi_ratios.size(); ++j) {
    BoundsRow r;
    r.role = j < nu ? "psi_u" : "psi_B";
    r.j = static_cast<int>(j + 1);
    r.ratios = level.diag.psi_ratios[j];
    rows.push_back(r);
  }
  for (std::size_t j = 0; j < level.diag.amp_ratios.size(); ++j) {
    BoundsRow r;
    r.role = j < nu ? "a_u" : "a_B";
    r.j = static_cast<int>(j + 1);
    r.ratios = level.diag.amp_ratios[j];
    rows.push_back(r);
  }
  return rows;
}

}  // namespace mhdc
