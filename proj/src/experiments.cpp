// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "mhdc/blocks.hpp"
#include "mhdc/corrector.hpp"
#include "mhdc/errors.hpp"
#include "mhdc/geometry.hpp"
#include "mhdc/harness.hpp"
#include "mhdc/principal.hpp"

#ifndef MHDC_VERSION
#define MHDC_VERSION "unversioned"
#endif

namespace mhdc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kExperiments = {"E1", "E2", "E3", "E4", "E5", "E6"};

CascadeParams params_from(const Config& c) {
  CascadeParams p;
  p.d = static_cast<int>(c.get_int("cascade.d"));
  p.A = c.get_int("cascade.A");
  p.b = c.get_double("cascade.b");
  p.gamma = c.get_optional_double("cascade.gamma");
  p.m_star = c.get_int("cascade.m_star");
  p.k_max = static_cast<int>(c.get_int("cascade.k_max"));
  p.J_d = static_cast<int>(c.get_int("cascade.J_d"));
  p.factor = c.get_double("cascade.factor");
  if (p.d != 2 && p.d != 3) throw ConfigError("key 'cascade.d': dimension must be 2 or 3");
  if (p.A < 2) throw ConfigError("key 'cascade.A': must be at least 2");
  if (p.k_max < 1) throw ConfigError("key 'cascade.k_max': must be at least 1");
  return p;
}

double tol(const ExperimentConfig& cfg, const std::string& name) { return cfg.tolerances.at(name); }

Criterion make_criterion(int id, const std::string& name, double measured, double tolerance,
                         const std::string& relation, bool pass, const std::string& note = "") {
  return Criterion{id, name, pass, measured, tolerance, relation, note};
}

double rel_l2(const SpectralField& a, const SpectralField& b) {
  const double nb = l2_norm(b);
  const double d = l2_norm(a - b);
  return nb > 0.0 ? d / nb : d;
}

std::string describe(const std::exception& e) { return e.what(); }

/// Cascade, plan and principal pair built once per experiment on demand.
struct Build {
  CascadeParams params;
  TorusGrid grid;
  std::optional<double> delta0;
  std::uint64_t seed = 0;
  std::unique_ptr<CascadeBuild> cb;

  CascadeBuild& get(double cap_mb) {
    if (!cb) {
      require_memory(cascade_bytes(grid, params.k_max), cap_mb, "cascade build");
      cb = std::make_unique<CascadeBuild>(build_cascade(params, grid, seed, delta0));
    }
    return *cb;
  }
};

Build reference_build(const ExperimentConfig& cfg) {
  Build b;
  b.params = cfg.params;
  b.grid = TorusGrid(3, cfg.grid_n);
  b.delta0 = cfg.raw.get_optional_double("delta0");
  b.seed = cfg.seed;
  return b;
}

Build surrogate_build(const ExperimentConfig& cfg) {
  Build b = reference_build(cfg);
  b.params.A = cfg.raw.get_int("surrogate.A");
  b.params.k_max = 1;
  b.grid = TorusGrid(3, static_cast<int>(cfg.raw.get_int("surrogate.n")));
  return b;
}

/// Grid from a key that is either "auto" or a point count.
TorusGrid grid_for(const Config& c, const std::string& key, const ScalePlan& plan) {
  const std::string v = c.get_string(key);
  if (v == "auto") return TorusGrid(3, required_grid(plan));
  return TorusGrid(3, static_cast<int>(c.get_int(key)));
}

// ----------------------------------------------------------------------------
// plan

void part_plan(const ExperimentConfig& cfg, RunReport& r) {
  const ScalePlan plan = build_plan(cfg.params);
  Table& t = r.add_table("ladder", {"j", "k", "log_N", "log_M", "t", "ell"});
  for (const auto& [jk, n] : plan.N) {
    const auto m = plan.M.find(jk);
    const auto tk = plan.t.find(jk.second);
    const auto lk = plan.ell.find(jk.second);
    t.rows.push_back({static_cast<double>(jk.first), static_cast<double>(jk.second), log_mpz(n),
                      m == plan.M.end() ? kNaN : log_mpz(m->second), tk == plan.t.end() ? kNaN : tk->second,
                      lk == plan.ell.end() ? kNaN : lk->second});
  }
  Table& o = r.add_table("ordering", {"kind", "j", "k", "log_ratio", "holds"});
  for (const auto& c : plan.ordering)
    o.rows.push_back({static_cast<double>(c.kind), static_cast<double>(c.j), static_cast<double>(c.k), c.log_ratio,
                      c.holds ? 1.0 : 0.0});
  r.add_value("plan.gamma", plan.gamma);
  r.add_value("plan.orderings_hold", plan.orderings_hold() ? 1.0 : 0.0);
  r.add_value("plan.required_grid", static_cast<double>(required_grid(plan)));
}

// ----------------------------------------------------------------------------
// E1 geometry

void part_geometry(const ExperimentConfig& cfg, RunReport& r) {
  const FrameSet b16 = builtin_lambda_B(16);
  const ValidationReport v16 = validate_frames(b16);
  const mpq_class expected(64, 81);
  const bool det_ok = v16.determinant && *v16.determinant == expected;
  r.add_value("lambda_B16.orthonormal", v16.orthonormal ? 1.0 : 0.0, 1.0);
  r.add_value("lambda_B16.determinant", v16.determinant ? v16.determinant->get_d() : kNaN, expected.get_d());
  for (const auto& [name, fs] : {std::pair<std::string, FrameSet>{"lambda_B10", builtin_lambda_B(10)},
                                 {"lambda_u", default_lambda_u()}}) {
    const ValidationReport v = validate_frames(fs);
    r.add_value(name + ".valid", v.ok() ? 1.0 : 0.0, 1.0);
    for (const auto& f : v.failures) r.errors.push_back(name + ": " + f);
  }
  for (const auto& f : v16.failures) r.errors.push_back("lambda_B16: " + f);
  r.criteria.push_back(make_criterion(1, "geometry exactness", det_ok ? 0.0 : 1.0, 0.0, "==",
                                      det_ok && v16.orthonormal && v16.ok(),
                                      "determinant " + (v16.determinant ? v16.determinant->get_str() : std::string("-"))));

  const AffineMap am = coupled_map(b16);
  const double radius = am.radius;
  const long samples = cfg.raw.get_int("geometry.samples");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0, min_gamma = std::numeric_limits<double>::infinity();
  long rejected = 0;
  for (long s = 0; s < samples; ++s) {
    Mat3 T{}, G{};
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) T[a][b] = T[b][a] = gauss(rng);
    const double tr = (T[0][0] + T[1][1] + T[2][2]) / 3.0;
    for (int a = 0; a < 3; ++a) T[a][a] -= tr;
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        G[a][b] = gauss(rng);
        G[b][a] = -G[a][b];
      }
    const double norm = std::hypot(frobenius(T), frobenius(G));
    const double scale = radius * std::pow(unif(rng), 1.0 / 8.0) / norm;
    const double p = 2.0 * unif(rng) - 1.0;
    Mat3 R{};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        T[a][b] *= scale;
        G[a][b] *= scale;
        R[a][b] = T[a][b] + (a == b ? p : 0.0);
      }
    try {
      const Decomposition d = decompose_coupled(SymTensor::from_matrix(R), SkewTensor::from_matrix(G), b16);
      const Mat3 rt = reconstruct_traceless(d, b16), rs = reconstruct_skew(d, b16);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const double pa = a == b ? *d.pressure : 0.0;
          worst = std::max(worst, std::abs(rt[a][b] + pa - R[a][b]));
          worst = std::max(worst, std::abs(rs[a][b] - G[a][b]));
        }
      for (double g : d.gamma_sq) min_gamma = std::min(min_gamma, g);
    } catch (const OutOfBall&) {
      ++rejected;
    }
  }
  r.add_value("coupled.radius", radius);
  r.add_value("coupled.samples", static_cast<double>(samples));
  r.add_value("coupled.min_gamma_sq", min_gamma, 0.0);
  r.add_value("coupled.out_of_ball", static_cast<double>(rejected), 0.0);
  const double tg = tol(cfg, "tol.geometry");
  r.criteria.push_back(make_criterion(2, "coupled reconstruction", worst, tg, "<=",
                                      worst <= tg && rejected == 0 && min_gamma > 0.0,
                                      "shared coefficients for both identities"));
}

// ----------------------------------------------------------------------------
// E2 operator identities

double quadrature_coefficient(double lambda, double mu, double t) {
  auto f = [&](double s) { return std::exp(-lambda * (t - s) - mu * s); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, t, 8, 1e-15);
}

void part_ops(const ExperimentConfig& cfg, RunReport& r) {
  const TorusGrid g(3, static_cast<int>(cfg.raw.get_int("ops.n")));
  const int K = static_cast<int>(cfg.raw.get_int("ops.band"));
  std::mt19937_64 rng(cfg.seed);
  const SpectralField f = random_field(g, Rank::Vector, K, rng);
  const SpectralField T = random_field(g, Rank::Tensor, K, rng);
  const SpectralField Pf = leray(f);
  const double to = tol(cfg, "tol.ops");
  const std::vector<std::pair<std::string, std::function<double()>>> ids = {
      {"div_D", [&] { return rel_l2(div(op_D(f)), laplacian(Pf)); }},
      {"div_newD", [&] { return rel_l2(div(op_newD(f)), laplacian(f)); }},
      {"div_Ds", [&] { return rel_l2(div(op_Ds(f)), laplacian(f)); }},
      {"div_calR", [&] { return rel_l2(div(op_calR(f)), p_nonzero(f)); }},
      {"Q", [&] { return rel_l2(op_Q(T), op_calR(leray(div(T)))); }},
      {"Q_D", [&] { return rel_l2(op_Q(op_D(f)), 2.0 * sym_grad(Pf)); }},
      {"Qs", [&] { return rel_l2(op_Qs(T), op_calRs(leray(div(T)))); }},
      {"Qs_Ds", [&] { return rel_l2(op_Qs(op_Ds(f)), grad(Pf) - transpose(grad(Pf))); }},
  };
  Table& tab = r.add_table("identities", {"index", "relative_error"});
  double worst = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double e = ids[i].second();
    tab.rows.push_back({static_cast<double>(i + 1), e});
    r.add_value("identity." + ids[i].first, e, to);
    worst = std::max(worst, e);
  }

  r.add_value("heat.semigroup", rel_l2(heat(heat(f, 0.3), 0.2), heat(f, 0.5)), 1e-13);
  r.add_value("leray.idempotent", rel_l2(leray(Pf), Pf), 1e-13);
  const SpectralField h = random_field(g, Rank::Vector, K, rng);
  const double sa = std::abs(inner(Pf, h) - inner(f, leray(h))) / (l2_norm(f) * l2_norm(h));
  r.add_value("leray.self_adjoint", sa, 1e-13);
  r.add_value("leray.divergence", l2_norm(div(Pf)) / l2_norm(f), 1e-13);

  // Coefficients against adaptive quadrature, including exact and near coincidences.
  const long ns = cfg.raw.get_int("ops.duhamel_samples");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double lmax = 3.0 * K * K;
  double dworst = 0.0;
  Table& dt = r.add_table("duhamel", {"lambda", "mu", "t", "coefficient", "quadrature", "relative_error"});
  auto check = [&](double lambda, double mu, double t) {
    const double c = duhamel_coefficient(lambda, mu, t);
    const double q = quadrature_coefficient(lambda, mu, t);
    const double e = std::abs(c - q) / std::abs(q);
    dworst = std::max(dworst, e);
    dt.rows.push_back({lambda, mu, t, c, q, e});
  };
  for (long s = 0; s < ns; ++s) {
    const double lambda = std::floor(unif(rng) * lmax);
    const double t = std::exp(std::log(1e-3) * unif(rng));
    const int branch = static_cast<int>(s % 4);
    double mu = unif(rng) * 2.0 * lmax;
    if (branch == 1) mu = lambda;
    if (branch == 2) mu = lambda * (1.0 + 1e-10 * (unif(rng) - 0.5));
    if (branch == 3) mu = 0.0;
    check(lambda, mu, t);
  }
  // Field level: every mode of duhamel_separable against quadrature of its |k|^2.
  const double mu_f = 37.0, t_f = 0.05;
  const SpectralField D = duhamel_separable(f, mu_f, t_f);
  const ModeTables& mt = modes(g);
  std::map<double, double> cache;
  double fworst = 0.0;
  for (int c = 0; c < D.ncomp(); ++c)
    for (std::size_t i = 0; i < g.spec_size(); ++i) {
      const cplx in = f.comp(c)[i];
      if (in == cplx(0.0)) continue;
      const double k2 = mt.k2[i];
      auto it = cache.find(k2);
      if (it == cache.end()) it = cache.emplace(k2, quadrature_coefficient(k2, mu_f, t_f)).first;
      fworst = std::max(fworst, std::abs(D.comp(c)[i] - in * it->second) / std::abs(in * it->second));
    }
  r.add_value("duhamel.coefficient_worst", dworst, tol(cfg, "tol.duhamel"));
  r.add_value("duhamel.field_worst", fworst, tol(cfg, "tol.duhamel"));
  const double td = tol(cfg, "tol.duhamel");
  const bool pass = worst <= to && dworst <= td && fworst <= td;
  std::ostringstream note;
  note << "eight identities on " << g.n << "^3, band " << K << "; duhamel worst " << format_number(std::max(dworst, fworst));
  r.criteria.push_back(make_criterion(3, "operator identities", worst, to, "<=", pass, note.str()));
}

// ----------------------------------------------------------------------------
// E3 cascade step, amplitude identity, scale separation, stress recovery

void part_cascade(const ExperimentConfig& cfg, RunReport& r, Build& surrogate) {
  const Config& c = cfg.raw;
  // Amplitude identity at level 1.
  {
    double worst = kNaN;
    std::string note;
    try {
      CascadeParams p = cfg.params;
      p.A = c.get_int("identity.A");
      const ScalePlan plan = build_plan(p);
      const TorusGrid g(3, static_cast<int>(c.get_int("identity.n")));
      require_memory(cascade_bytes(g, 1), cfg.memory_cap_mb, "amplitude identity build");
      const BlockGeometry geo = make_block_geometry(default_lambda_u(), builtin_lambda_B(16), p.J_d, cfg.seed,
                                                    c.get_optional_double("delta0"));
      const BlockLevel L0 = init_level0(geo.lambda_u, g);
      AmplitudeConstants constants;
      BuildOptions opt;
      opt.amplitudes_only = true;
      const BlockLevel L1 = next_level(L0, plan, constants, geo, {}, opt);
      worst = 0.0;
      for (int i = 0; i < 3; ++i) {
        r.add_value("amplitude_identity." + std::to_string(i + 1), L1.diag.identity_residual[i], tol(cfg, "tol.identity"));
        worst = std::max(worst, L1.diag.identity_residual[i]);
      }
      r.add_value("amplitude_identity.c", L1.diag.c);
      note = "A = " + std::to_string(p.A) + ", " + std::to_string(g.n) + "^3";
    } catch (const std::exception& e) {
      note = describe(e);
      r.errors.push_back("amplitude identity: " + note);
    }
    const double ti = tol(cfg, "tol.identity");
    r.criteria.push_back(make_criterion(4, "amplitude identity", worst, ti, "<=", worst <= ti, note));
  }

  // Scale separation table.
  {
    CascadeParams p = cfg.params;
    p.d = static_cast<int>(c.get_int("separation.d"));
    p.A = c.get_int("separation.A");
    p.b = c.get_double("separation.b");
    p.m_star = c.get_int("separation.m_star");
    p.gamma = std::nullopt;
    const int k = static_cast<int>(c.get_int("separation.k"));
    p.k_max = std::max(p.k_max, k);
    const ScalePlan plan = build_plan(p);
    const SeparationTable st = scale_separation_table(plan, k, c.get_double("separation.t"));
    Table& t = r.add_table("separation", {"j", "jp", "log_Nj", "log_Njp", "value", "diag", "ratio", "bound", "holds"});
    for (const auto& row : st.rows)
      t.rows.push_back({static_cast<double>(row.j), static_cast<double>(row.jp), std::log(row.Nj), std::log(row.Njp),
                        row.value, row.diag, row.ratio, row.bound, row.holds ? 1.0 : 0.0});
    const double td = tol(cfg, "tol.diag");
    r.criteria.push_back(make_criterion(6, "scale separation", st.max_diag_defect, td, "<=",
                                        st.bounds_hold && st.max_diag_defect <= td && !st.rows.empty(),
                                        st.bounds_hold ? "off-diagonal bounds hold" : "an off-diagonal bound fails"));
  }

  // Cascade step along the ladder.
  {
    const int k = static_cast<int>(c.get_int("cascade.k"));
    const double t = c.get_double("cascade.t");
    Table& tab = r.add_table("cascade_ladder", {"A", "n", "discrepancy_u", "discrepancy_B", "target_u", "target_B"});
    std::vector<double> disc;
    std::string note;
    for (long A : cfg.ladder) {
      CascadeParams p = cfg.params;
      p.A = A;
      p.k_max = std::max(p.k_max, k + 1);
      double du = kNaN, dB = kNaN, tu = kNaN, tB = kNaN;
      int n = 0;
      try {
        const ScalePlan plan = build_plan(p);
        const TorusGrid g = grid_for(c, "cascade.grid", plan);
        n = g.n;
        require_memory(cascade_bytes(g, p.k_max), cfg.memory_cap_mb, "cascade build at A = " + std::to_string(A));
        const CascadeBuild cb = build_cascade(p, g, cfg.seed, c.get_optional_double("delta0"));
        const CascadeStepReport rep = cascade_step_check(cb.pair, k, t);
        du = rep.discrepancy_u;
        dB = rep.discrepancy_B;
        tu = rep.target_u;
        tB = rep.target_B;
      } catch (const std::exception& e) {
        r.errors.push_back("cascade step A = " + std::to_string(A) + ": " + describe(e));
        if (note.empty()) note = "A = " + std::to_string(A) + ": " + describe(e);
      }
      tab.rows.push_back({static_cast<double>(A), static_cast<double>(n), du, dB, tu, tB});
      disc.push_back(std::max(du, dB));
    }
    bool decreasing = !disc.empty();
    for (std::size_t i = 0; i < disc.size(); ++i) {
      if (!std::isfinite(disc[i])) decreasing = false;
      if (i > 0 && !(disc[i] < disc[i - 1])) decreasing = false;
    }
    const double last = disc.empty() ? kNaN : disc.back();
    const double tc = tol(cfg, "tol.cascade");
    r.criteria.push_back(make_criterion(5, "inverse cascade step", last, tc, "decreasing",
                                        decreasing && last <= tc, note.empty() ? "both equations" : note));
  }

  // Informational desk surrogate.
  try {
    CascadeBuild& cb = surrogate.get(cfg.memory_cap_mb);
    const CascadeStepReport rep = cascade_step_check(cb.pair, 0, c.get_double("cascade.t"));
    r.add_value("surrogate.A", static_cast<double>(surrogate.params.A));
    r.add_value("surrogate.cascade.discrepancy_u", rep.discrepancy_u);
    r.add_value("surrogate.cascade.discrepancy_B", rep.discrepancy_B);
    r.add_value("surrogate.cascade.magnetic_normalised_by_velocity", rep.magnetic_normalised_by_velocity ? 1.0 : 0.0);
  } catch (const std::exception& e) {
    r.errors.push_back("surrogate cascade: " + describe(e));
  }
}

void part_prop51(const ExperimentConfig& cfg, RunReport& r, Build& surrogate) {
  try {
    CascadeBuild& cb = surrogate.get(cfg.memory_cap_mb);
    const std::vector<double> times = cfg.raw.get_double_list("prop51.times");
    const double alpha = cfg.raw.get_double("corrector.alpha");
    const Prop51Report rep = verify_prop51(cb.pair, cb.levels.at(1), 0, 1.0, times, alpha);
    Table& t = r.add_table("prop51", {"t", "err_u", "err_B", "ref_u", "ref_B"});
    for (const auto& row : rep.rows) t.rows.push_back({row.t, row.err_u, row.err_B, row.ref_u, row.ref_B});
    r.add_value("prop51.envelope_u", rep.envelope_u);
    r.add_value("prop51.envelope_B", rep.envelope_B);
    r.add_value("prop51.late_decay_u", rep.late_decay_u ? 1.0 : 0.0);
    r.add_value("prop51.late_decay_B", rep.late_decay_B ? 1.0 : 0.0);
    Table& d = r.add_table("discrepancy", {"t", "R", "H"});
    for (const auto& row : discrepancy_report(cb.pair, 0, times)) d.rows.push_back({row.t, row.R, row.H});
  } catch (const std::exception& e) {
    r.errors.push_back("stress recovery: " + describe(e));
  }
}

// ----------------------------------------------------------------------------
// E4 blowup probe

void part_probe(const ExperimentConfig& cfg, RunReport& r, Build& surrogate) {
  const Config& c = cfg.raw;
  const double lo = c.get_double("probe.lo"), hi = c.get_double("probe.hi");
  CascadeParams p = cfg.params;
  p.A = c.get_int("probe.A");
  p.k_max = static_cast<int>(c.get_int("probe.k_max"));
  double worst = kNaN;
  bool pass = false;
  std::string note;
  try {
    const ScalePlan plan = build_plan(p);
    r.add_value("probe.required_grid", static_cast<double>(required_grid(plan)));
    const TorusGrid g = grid_for(c, "probe.grid", plan);
    require_memory(cascade_bytes(g, p.k_max), cfg.memory_cap_mb, "probe build");
    const CascadeBuild cb = build_cascade(p, g, cfg.seed, c.get_optional_double("delta0"));
    const ProbeTable tab = blowup_probe(cb.pair, cb.plan, lo, hi);
    Table& t = r.add_table("probe", {"n", "t", "v", "h", "curl_v", "curl_h", "in_band"});
    worst = std::numeric_limits<double>::infinity();
    for (const auto& row : tab.rows) {
      t.rows.push_back({static_cast<double>(row.n), row.t, row.v, row.h, row.curl_v, row.curl_h, row.in_band ? 1.0 : 0.0});
      worst = std::min({worst, row.v, row.h});
    }
    pass = tab.pass && static_cast<int>(tab.rows.size()) == p.k_max + 1;
    note = "A = " + std::to_string(p.A) + ", k_max = " + std::to_string(p.k_max);
  } catch (const std::exception& e) {
    note = describe(e);
    r.errors.push_back("blowup probe: " + note);
  }
  r.criteria.push_back(make_criterion(7, "blowup rate probe", worst, lo, ">=", pass,
                                      note + "; band [" + format_number(lo) + ", " + format_number(hi) + "]"));

  try {
    CascadeBuild& cb = surrogate.get(cfg.memory_cap_mb);
    const ProbeTable tab = blowup_probe(cb.pair, cb.plan, lo, hi);
    Table& t = r.add_table("surrogate_probe", {"n", "t", "v", "h", "curl_v", "curl_h", "in_band"});
    for (const auto& row : tab.rows)
      t.rows.push_back({static_cast<double>(row.n), row.t, row.v, row.h, row.curl_v, row.curl_h, row.in_band ? 1.0 : 0.0});
    const PrincipalPair& pair = cb.pair;
    const double t1 = cb.plan.t.at(1);
    const CriticalNormReport cn =
        critical_norm_probe([&pair](double t) { return pair.vbar(t); }, t1, 1.0, static_cast<double>(cb.plan.params.A));
    r.add_value("surrogate.A", static_cast<double>(surrogate.params.A));
    r.add_value("surrogate.critical.l2_linf_sq", cn.l2_linf_sq);
    r.add_value("surrogate.critical.weighted", cn.weighted);
    r.add_value("surrogate.critical.windows", cn.windows);
    r.add_value("surrogate.critical.coefficient", cn.coefficient);
  } catch (const std::exception& e) {
    r.errors.push_back("surrogate probe: " + describe(e));
  }
}

// ----------------------------------------------------------------------------
// E5 forcing and residual

void part_forcing(const ExperimentConfig& cfg, RunReport& r, Build& reference) {
  try {
    CascadeBuild& cb = reference.get(cfg.memory_cap_mb);
    const double lo = cfg.t_lo.value_or(cb.plan.t.at(cb.plan.params.k_max));
    const double hi = cfg.t_hi.value_or(4.0);
    const std::vector<double> times =
        geometric_times(lo, hi, static_cast<int>(cfg.raw.get_int("forcing.per_octave")));
    const ForcingReport rep = build_forcing(cb.pair, times, cfg.raw.get_double("corrector.alpha"));
    Table& t = r.add_table("forcing", {"t", "sup_u", "sup_B"});
    for (const auto& row : rep.rows) t.rows.push_back({row.t, row.sup_u, row.sup_B});
    r.add_value("forcing.envelope_u", rep.envelope_u);
    r.add_value("forcing.envelope_B", rep.envelope_B);
  } catch (const std::exception& e) {
    r.errors.push_back("forcing: " + describe(e));
  }
}

void part_residual(const ExperimentConfig& cfg, RunReport& r, Build& reference) {
  const Config& c = cfg.raw;
  double order = kNaN;
  std::string note;
  try {
    CascadeBuild& cb = reference.get(cfg.memory_cap_mb);
    const TimeFields tf = principal_fields(cb.pair);
    std::vector<double> centres;
    const double ratio = c.get_double("residual.centre_spacing");
    const double lo = cfg.t_lo.value_or(4.0 * cb.plan.t.at(cb.plan.params.k_max));
    const double hi = c.get_double("residual.t_hi");
    if (!(ratio > 1.0)) throw ConfigError("key 'residual.centre_spacing': must exceed 1");
    for (double t = lo; t <= hi * (1.0 + 1e-12); t *= ratio) centres.push_back(t);
    std::vector<int> refinements;
    for (long m : c.get_int_list("residual.refinements")) refinements.push_back(static_cast<int>(m));
    const ResidualReport rep = forced_residual(tf, centres, refinements);
    Table& t = r.add_table("residual", {"per_octave", "residual_u", "residual_B"});
    for (const auto& lv : rep.levels) t.rows.push_back({static_cast<double>(lv.per_octave), lv.residual_u, lv.residual_B});
    Table& o = r.add_table("residual_order", {"from", "to", "order_u", "order_B"});
    order = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.order_u.size(); ++i) {
      o.rows.push_back({static_cast<double>(refinements[i]), static_cast<double>(refinements[i + 1]), rep.order_u[i],
                        rep.order_B[i]});
      order = std::min({order, rep.order_u[i], rep.order_B[i]});
    }
    if (rep.order_u.empty()) order = kNaN;
    r.add_value("residual.centres", static_cast<double>(centres.size()));
    note = "A = " + std::to_string(cb.plan.params.A) + ", " + std::to_string(reference.grid.n) + "^3";
  } catch (const std::exception& e) {
    note = describe(e);
    r.errors.push_back("forced residual: " + note);
  }

  // Heat-only case: v = e^{t Lap} v0, h = e^{t Lap} h0 with the forcing equal
  // to the full quadratic terms, so only the time stencil contributes.
  double heat_res = kNaN;
  try {
    const TorusGrid g(3, static_cast<int>(c.get_int("heat.n")));
    std::mt19937_64 rng(cfg.seed);
    const int K = static_cast<int>(c.get_int("heat.band"));
    const SpectralField v0 = leray(random_field(g, Rank::Vector, K, rng));
    const SpectralField h0 = leray(random_field(g, Rank::Vector, K, rng));
    TimeFields tf;
    tf.v = [v0](double t) { return heat(v0, t); };
    tf.h = [h0](double t) { return heat(h0, t); };
    tf.f = [v0, h0](double t) {
      const SpectralField v = heat(v0, t), h = heat(h0, t);
      return ForcingPair{outer_diff(v, v, h, h), outer_diff(v, h, h, v)};
    };
    const ResidualReport rep =
        forced_residual(tf, {0.0625, 0.125, 0.25}, {static_cast<int>(c.get_int("heat.refinement"))});
    heat_res = std::max(rep.levels.at(0).residual_u, rep.levels.at(0).residual_B);
  } catch (const std::exception& e) {
    r.errors.push_back("heat-only case: " + describe(e));
  }
  const double th = tol(cfg, "tol.heat");
  r.add_value("heat_only.residual", heat_res, th);
  const double to = tol(cfg, "tol.order");
  r.criteria.push_back(make_criterion(8, "forced residual", order, to, ">=", order >= to && heat_res <= th,
                                      note + "; heat-only residual " + format_number(heat_res)));
}

// ----------------------------------------------------------------------------
// E6 corrector

CorrectorOptions corrector_options(const Config& c) {
  CorrectorOptions o;
  o.t_start = c.get_double("corrector.t_start");
  o.horizon = c.get_double("corrector.horizon");
  o.steps_per_octave = static_cast<int>(c.get_int("corrector.steps_per_octave"));
  o.norm_per_octave = static_cast<int>(c.get_int("corrector.norm_per_octave"));
  o.iterates = static_cast<int>(c.get_int("corrector.iterates"));
  o.alpha = c.get_double("corrector.alpha");
  o.kappa = c.get_double("corrector.kappa");
  o.lag = static_cast<int>(c.get_int("corrector.lag"));
  o.cfl = c.get_double("corrector.cfl");
  o.background = background_from_name(c.get_string("background"), c.get_double("background.a"),
                                      c.get_double("background.b"));
  return o;
}

struct CorrectorOutcome {
  PicardReport rep;
  double end_to_end = kNaN;
};

CorrectorOutcome corrector_on(const CascadeBuild& cb, const TorusGrid& g, const CorrectorOptions& o, int N0) {
  const PrincipalPair pair = cb.pair.grid() == g ? cb.pair : resample_pair(cb.pair, g);
  const TimeFields tf = principal_fields(pair);
  CorrectorOutcome out;
  out.rep = picard_iterate(tf, g, o);
  const AssembledSolution s = assemble_solution(tf, out.rep.state, N0, o.background);
  out.end_to_end = end_to_end_residual(s);
  return out;
}

void record_picard(RunReport& r, const std::string& prefix, const CorrectorOutcome& out) {
  const PicardReport& p = out.rep;
  Table& t = r.add_table(prefix + "picard", {"iterate", "distance", "ratio"});
  for (std::size_t i = 0; i < p.distances.size(); ++i)
    t.rows.push_back({static_cast<double>(i + 1), p.distances[i], i == 0 ? kNaN : p.ratios[i - 1]});
  r.add_value(prefix + "t_start", p.t_start);
  r.add_value(prefix + "T_bar", p.T_bar);
  r.add_value(prefix + "steps", static_cast<double>(p.steps));
  r.add_value(prefix + "min_step", p.min_step);
  r.add_value(prefix + "max_step", p.max_step);
  r.add_value(prefix + "source_y_norm", p.source_y_norm);
  r.add_value(prefix + "last_x_norm", p.last_x_norm);
  r.add_value(prefix + "fixed_point_residual", p.fixed_point_residual);
  r.add_value(prefix + "divergence", p.divergence);
  r.add_value(prefix + "monotone", p.monotone ? 1.0 : 0.0);
  r.add_value(prefix + "end_to_end_residual", out.end_to_end);
}

void part_corrector(const ExperimentConfig& cfg, RunReport& r, Build& surrogate) {
  const Config& c = cfg.raw;
  const CorrectorOptions o = corrector_options(c);
  const int N0 = static_cast<int>(c.get_int("corrector.N0"));
  const TorusGrid g(3, static_cast<int>(c.get_int("corrector.n")));
  auto source_grid = [&]() {
    const std::string v = c.get_string("corrector.source_n");
    return v == "auto" ? g : TorusGrid(3, static_cast<int>(c.get_int("corrector.source_n")));
  };
  const double tr = tol(cfg, "tol.ratio"), tf = tol(cfg, "tol.fixed_point");
  double worst_ratio = kNaN;
  bool pass = false;
  std::string note;
  try {
    Build b = reference_build(cfg);
    b.params.A = c.get_int("corrector.A");
    b.grid = source_grid();
    const CascadeBuild& cb = b.get(cfg.memory_cap_mb);
    const CorrectorOutcome out = corrector_on(cb, g, o, N0);
    record_picard(r, "", out);
    worst_ratio = 0.0;
    for (std::size_t i = 1; i < out.rep.ratios.size(); ++i) worst_ratio = std::max(worst_ratio, out.rep.ratios[i]);
    pass = out.rep.ratios_below_half && out.rep.fixed_point_residual <= tf &&
           static_cast<int>(out.rep.distances.size()) >= o.iterates;
    note = "fixed point residual " + format_number(out.rep.fixed_point_residual);
  } catch (const std::exception& e) {
    note = describe(e);
    r.errors.push_back("corrector: " + note);
  }
  r.criteria.push_back(make_criterion(9, "corrector contraction", worst_ratio, tr, "<=", pass,
                                      note + "; fixed point tolerance " + format_number(tf)));

  try {
    CascadeBuild& cb = surrogate.get(cfg.memory_cap_mb);
    const CorrectorOutcome out = corrector_on(cb, g, o, N0);
    r.add_value("surrogate.A", static_cast<double>(surrogate.params.A));
    record_picard(r, "surrogate.", out);
  } catch (const std::exception& e) {
    r.errors.push_back("surrogate corrector: " + describe(e));
  }
}

RunReport fresh_report(const std::string& name, const ExperimentConfig& cfg) {
  RunReport r;
  r.experiment = name;
  r.seed = cfg.seed;
  r.config_hash = cfg.raw.hash();
  r.version = MHDC_VERSION;
  return r;
}

template <class F>
void guarded(RunReport& r, const std::string& what, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    r.errors.push_back(what + ": " + describe(e));
  }
}

}  // namespace

// ----------------------------------------------------------------------------

double tensor_bytes(const TorusGrid& g) {
  return static_cast<double>(g.d * g.d) * static_cast<double>(g.spec_size()) * sizeof(cplx);
}

double cascade_bytes(const TorusGrid& g, int k_max) {
  // A 64^3 build with k_max = 1 peaks near 27 tensors.
  return tensor_bytes(g) * (12.0 + 16.0 * k_max);
}

void require_memory(double bytes, double cap_mb, const std::string& what) {
  const double mb = bytes / (1024.0 * 1024.0);
  if (mb > cap_mb) {
    std::ostringstream s;
    s << what << " needs about " << static_cast<long long>(std::ceil(mb)) << " MiB, cap is " << cap_mb << " MiB";
    throw MemoryBudgetExceeded(s.str());
  }
}

int required_grid(const ScalePlan& plan) {
  double eta_max = 0.0;
  for (const FrameSet& fs : {default_lambda_u(), builtin_lambda_B(16)})
    for (const Frame& f : fs.frames)
      for (const auto& e : f.eta) eta_max = std::max(eta_max, std::abs(e.get_d()));
  double band = 1.0;
  for (int k = 1; k <= plan.params.k_max; ++k)
    band = std::max(band, plan.nd(1, k) * eta_max + plan.md(1, k));
  const double n = 3.0 * band + 1.0;
  if (n > 1e9) return std::numeric_limits<int>::max() - 1;
  int out = static_cast<int>(std::ceil(n));
  if (out % 2) ++out;
  return out;
}

ExperimentConfig experiment_config(const Config& c) {
  ExperimentConfig e;
  e.raw = c;
  e.id = c.get_string("experiment");
  if (e.id != "run" && std::find(kExperiments.begin(), kExperiments.end(), e.id) == kExperiments.end())
    throw ConfigError("key 'experiment': unknown experiment id '" + e.id + "'");
  e.params = params_from(c);
  e.grid_n = static_cast<int>(c.get_int("grid.n"));
  if (e.grid_n < 4 || e.grid_n % 2) throw ConfigError("key 'grid.n': must be even and at least 4");
  e.ladder = c.get_int_list("ladder.A");
  e.t_lo = c.get_optional_double("time.lo");
  e.t_hi = c.get_optional_double("time.hi");
  for (const auto& k : config_keys())
    if (k.key.rfind("tol.", 0) == 0) e.tolerances[k.key] = c.get_double(k.key);
  e.out_dir = c.get_string("out");
  const long seed = c.get_int("seed");
  if (seed < 0) throw ConfigError("key 'seed': must be non-negative");
  e.seed = static_cast<std::uint64_t>(seed);
  e.memory_cap_mb = c.get_double("memory_cap_mb");
  corrector_options(c);
  return e;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"plan",         "geometry-check", "ops-check", "cascade-step",
                                             "prop51",       "blowup-probe",   "forcing",   "residual",
                                             "corrector",    "run"};
  return s;
}

std::string experiment_of(const std::string& sub) {
  if (sub == "geometry-check") return "E1";
  if (sub == "ops-check") return "E2";
  if (sub == "cascade-step" || sub == "prop51") return "E3";
  if (sub == "blowup-probe") return "E4";
  if (sub == "forcing" || sub == "residual") return "E5";
  if (sub == "corrector") return "E6";
  return "";
}

RunReport run_subcommand(const std::string& name, const ExperimentConfig& cfg) {
  RunReport r = fresh_report(name, cfg);
  Build ref = reference_build(cfg), sur = surrogate_build(cfg);
  guarded(r, name, [&] {
    if (name == "plan") part_plan(cfg, r);
    else if (name == "geometry-check") part_geometry(cfg, r);
    else if (name == "ops-check") part_ops(cfg, r);
    else if (name == "cascade-step") part_cascade(cfg, r, sur);
    else if (name == "prop51") part_prop51(cfg, r, sur);
    else if (name == "blowup-probe") part_probe(cfg, r, sur);
    else if (name == "forcing") part_forcing(cfg, r, ref);
    else if (name == "residual") part_residual(cfg, r, ref);
    else if (name == "corrector") part_corrector(cfg, r, sur);
    else throw ConfigError("unknown subcommand '" + name + "'");
  });
  return r;
}

RunReport run_experiment(const std::string& id, const ExperimentConfig& cfg) {
  if (std::find(kExperiments.begin(), kExperiments.end(), id) == kExperiments.end())
    throw ConfigError("unknown experiment id '" + id + "'");
  RunReport r = fresh_report(id, cfg);
  Build ref = reference_build(cfg), sur = surrogate_build(cfg);
  if (id == "E1") guarded(r, "geometry", [&] { part_geometry(cfg, r); });
  if (id == "E2") guarded(r, "operators", [&] { part_ops(cfg, r); });
  if (id == "E3") {
    guarded(r, "cascade", [&] { part_cascade(cfg, r, sur); });
    guarded(r, "stress recovery", [&] { part_prop51(cfg, r, sur); });
  }
  if (id == "E4") guarded(r, "probe", [&] { part_probe(cfg, r, sur); });
  if (id == "E5") {
    guarded(r, "forcing", [&] { part_forcing(cfg, r, ref); });
    guarded(r, "residual", [&] { part_residual(cfg, r, ref); });
  }
  if (id == "E6") guarded(r, "corrector", [&] { part_corrector(cfg, r, sur); });
  std::sort(r.criteria.begin(), r.criteria.end(), [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
  return r;
}

std::vector<RunReport> run(const ExperimentConfig& cfg) {
  std::vector<std::string> ids;
  if (cfg.id == "run") ids = kExperiments;
  else ids = {cfg.id};
  std::vector<RunReport> out;
  for (const auto& id : ids) {
    RunReport r = run_experiment(id, cfg);
    const std::string dir = (std::filesystem::path(cfg.out_dir) / id).string();
    try {
      emit(r, EmitFormat::Json, dir);
      emit(r, EmitFormat::Csv, dir);
    } catch (const IoError& e) {
      r.errors.push_back(e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mhdc
