// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include "mhdc/scales.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "mhdc/errors.hpp"

namespace mhdc {

double default_gamma(double b, int J_d) {
  const double lo = std::pow(b, -1.0 / J_d);
  if (lo < 0.5) return 0.5;
  return 0.5 * (lo + 1.0);
}

long compute_m_star(const std::vector<FrameSet>& sets, bool include_seed) {
  long l = 1;
  for (const auto& s : sets) l = std::lcm(l, eta_denominator_lcm(s, include_seed));
  return l;
}

double log_mpz(const mpz_class& z) {
  long e = 0;
  const double m = mpz_get_d_2exp(&e, z.get_mpz_t());
  return std::log(m) + static_cast<double>(e) * std::log(2.0);
}

const mpz_class& ScalePlan::n_at(int j, int k) const {
  auto it = N.find({j, k});
  if (it == N.end()) throw Error("ScalePlan: N(" + std::to_string(j) + "," + std::to_string(k) + ") undefined");
  return it->second;
}

const mpz_class& ScalePlan::m_at(int j, int k) const {
  auto it = M.find({j, k});
  if (it == M.end()) throw Error("ScalePlan: M(" + std::to_string(j) + "," + std::to_string(k) + ") undefined");
  return it->second;
}

bool ScalePlan::orderings_hold() const {
  for (const auto& c : ordering)
    if (!c.holds) return false;
  return true;
}

namespace {

// Ceiling that is robust to pow() landing just above an exact integer.
long safe_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(x))) return static_cast<long>(r);
  return static_cast<long>(std::ceil(x));
}

mpz_class power(long A, long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(A), static_cast<unsigned long>(e));
  return r;
}

std::vector<OrderingCheck> separation_checks(const ScalePlan& pl, double factor) {
  std::vector<OrderingCheck> out;
  const double lf = std::log(factor);
  const int J = pl.params.J_d;
  auto add = [&](const std::string& name, int j, int k, const mpz_class& big, const mpz_class& small) {
    OrderingCheck c;
    c.kind = OrderingKind::Separation;
    c.name = name;
    c.j = j;
    c.k = k;
    c.log_ratio = log_mpz(big) - log_mpz(small);
    c.holds = c.log_ratio >= lf - 1e-12;
    out.push_back(c);
  };
  for (int k = 1; k <= pl.params.k_max; ++k) {
    for (int j = 1; j <= J; ++j) {
      const mpz_class& M = pl.m_at(j, k);
      add("N(j,k) >= c M(j,k)", j, k, pl.n_at(j, k), M);
      if (pl.params.d >= 3) {
        if (pl.has_N(j, k - 1)) add("M(j,k) >= c N(j,k-1)", j, k, M, pl.n_at(j, k - 1));
      } else if (j >= 2) {
        add("M(j,k) >= c N(j-1,k)", j, k, M, pl.n_at(j - 1, k));
      } else {
        const int jp = pl.has_N(J, k - 1) ? J : 1;
        add("M(1,k) >= c N(J,k-1)", j, k, M, pl.n_at(jp, k - 1));
      }
    }
  }
  return out;
}

}  // namespace

ScalePlan build_plan(const CascadeParams& p) {
  if (p.d != 2 && p.d != 3) throw Error("build_plan: d must be 2 or 3");
  if (p.A < 2) throw Error("build_plan: A must exceed 1");
  if (!(p.b > 1.0)) throw Error("build_plan: b must exceed 1");
  if (p.k_max < 1) throw Error("build_plan: k_max must be at least 1");
  if (p.J_d < 1 || p.m_star < 1) throw Error("build_plan: J_d and m_star must be positive");
  ScalePlan pl;
  pl.params = p;
  pl.gamma = p.gamma ? *p.gamma : default_gamma(p.b, p.J_d);
  const double lo = std::pow(p.b, -1.0 / p.J_d);
  if (!(pl.gamma > lo && pl.gamma < 1.0))
    throw Error("build_plan: gamma outside (b^{-1/J_d}, 1) = (" + std::to_string(lo) + ", 1)");
  const int J = p.J_d;

  pl.N[{1, 0}] = 1;
  for (int k = 1; k <= p.k_max + 1; ++k) {
    for (int j = 1; j <= J; ++j) {
      const double e = p.d == 2 ? std::pow(p.b, k + static_cast<double>(j - 1) / J) : std::pow(p.b, k);
      pl.N[{j, k}] = p.m_star * power(p.A, safe_ceil(e));
    }
    const mpz_class M1 = power(p.A, safe_ceil(pl.gamma * std::pow(p.b, k)));
    for (int j = 1; j <= J; ++j) {
      if (p.d >= 3 || j == 1)
        pl.M[{j, k}] = M1;
      else
        pl.M[{j, k}] = power(p.A, safe_ceil(pl.gamma * std::pow(p.b, static_cast<double>(j - 1) / J))) * M1;
    }
  }
  for (int k = 1; k <= p.k_max; ++k) {
    const double lnJ = log_mpz(pl.n_at(J, k));
    pl.t[k] = std::exp(-4.0 * lnJ);
    pl.ell[k] = std::exp(-0.5 * (log_mpz(pl.n_at(1, k)) + log_mpz(pl.n_at(1, k + 1))));
  }

  // Monotonicity.
  for (int k = 1; k <= p.k_max; ++k) {
    for (int j = 1; j <= J; ++j) {
      const mpz_class& a = pl.n_at(j, k);
      const mpz_class& b = j < J ? pl.n_at(j + 1, k) : pl.n_at(1, k + 1);
      OrderingCheck c;
      c.kind = OrderingKind::Monotone;
      c.j = j;
      c.k = k;
      c.log_ratio = log_mpz(b) - log_mpz(a);
      if (p.d == 2 || j == J) {
        c.name = j < J ? "N(j,k) < N(j+1,k)" : "N(J,k) < N(1,k+1)";
        c.holds = a < b;
      } else {
        c.name = "N(j,k) = N(j+1,k)";
        c.holds = a == b;
      }
      pl.ordering.push_back(c);
    }
    OrderingCheck prev;
    prev.kind = OrderingKind::Monotone;
    prev.name = "N(1,k-1) < N(1,k)";
    prev.j = 1;
    prev.k = k;
    prev.log_ratio = log_mpz(pl.n_at(1, k)) - log_mpz(pl.n_at(1, k - 1));
    prev.holds = pl.n_at(1, k - 1) < pl.n_at(1, k);
    pl.ordering.push_back(prev);
  }
  // Separation of the intermediate scales.
  for (auto& c : separation_checks(pl, p.factor)) pl.ordering.push_back(c);
  // Time scales: N(1,k+1)^-2 << t_k << N(J,k)^-3.
  const double lf = std::log(p.factor);
  for (int k = 1; k <= p.k_max; ++k) {
    const double lt = -4.0 * log_mpz(pl.n_at(J, k));
    OrderingCheck lo_c, hi_c;
    lo_c.kind = hi_c.kind = OrderingKind::Time;
    lo_c.j = hi_c.j = 0;
    lo_c.k = hi_c.k = k;
    lo_c.name = "t_k >> N(1,k+1)^-2";
    lo_c.log_ratio = lt + 2.0 * log_mpz(pl.n_at(1, k + 1));
    lo_c.holds = lo_c.log_ratio >= lf - 1e-12;
    hi_c.name = "t_k << N(J,k)^-3";
    hi_c.log_ratio = -3.0 * log_mpz(pl.n_at(J, k)) - lt;
    hi_c.holds = hi_c.log_ratio >= lf - 1e-12;
    pl.ordering.push_back(lo_c);
    pl.ordering.push_back(hi_c);
  }
  return pl;
}

SeparationReport verify_separation(const ScalePlan& plan, double factor) {
  SeparationReport r;
  r.factor = factor;
  r.checks = separation_checks(plan, factor);
  for (const auto& c : r.checks)
    if (!c.holds) r.pass = false;
  return r;
}

void require_orderings(const ScalePlan& plan) {
  std::ostringstream os;
  int bad = 0;
  for (const auto& c : plan.ordering) {
    if (c.holds) continue;
    if (bad++) os << "; ";
    os << c.name << " at j=" << c.j << " k=" << c.k << " (ratio " << std::exp(c.log_ratio) << ")";
  }
  if (bad) throw OrderingViolated(os.str());
}

bool integer_wavevectors(const ScalePlan& plan, const std::vector<FrameSet>& sets) {
  std::vector<QVec3> dirs;
  for (const auto& s : sets)
    for (const auto& f : s.frames) dirs.push_back(f.eta);
  for (const auto& [key, n] : plan.N) {
    const auto [j, k] = key;
    if (k < 1 || j < 1 || j > static_cast<int>(dirs.size())) continue;
    for (const auto& x : dirs[j - 1]) {
      const mpq_class v = mpq_class(n) * x;
      if (v.get_den() != 1) return false;
    }
  }
  return true;
}

nlohmann::json plan_to_json(const ScalePlan& plan) {
  nlohmann::json j;
  const auto& p = plan.params;
  j["params"] = {{"d", p.d}, {"A", p.A}, {"b", p.b}, {"gamma", plan.gamma}, {"m_star", p.m_star},
                 {"k_max", p.k_max}, {"J_d", p.J_d}, {"factor", p.factor}};
  j["ladder"] = nlohmann::json::array();
  for (const auto& [key, n] : plan.N) {
    nlohmann::json e{{"j", key.first}, {"k", key.second}, {"N", n.get_str()}};
    auto m = plan.M.find(key);
    if (m != plan.M.end()) e["M"] = m->second.get_str();
    if (plan.t.count(key.second)) {
      e["t"] = plan.t.at(key.second);
      e["ell"] = plan.ell.at(key.second);
    }
    j["ladder"].push_back(e);
  }
  j["ordering"] = nlohmann::json::array();
  for (const auto& c : plan.ordering)
    j["ordering"].push_back({{"name", c.name}, {"j", c.j}, {"k", c.k}, {"ratio", std::exp(c.log_ratio)},
                             {"holds", c.holds}});
  j["orderings_hold"] = plan.orderings_hold();
  return j;
}

std::string plan_csv(const ScalePlan& plan) {
  std::ostringstream os;
  os.precision(17);
  os << "j,k,N,M,t,ell\n";
  for (const auto& [key, n] : plan.N) {
    os << key.first << ',' << key.second << ',' << n.get_str() << ',';
    auto m = plan.M.find(key);
    if (m != plan.M.end()) os << m->second.get_str();
    os << ',';
    if (plan.t.count(key.second)) os << plan.t.at(key.second) << ',' << plan.ell.at(key.second);
    else os << ',';
    os << '\n';
  }
  return os.str();
}

}  // namespace mhdc
