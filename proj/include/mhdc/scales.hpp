// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <gmpxx.h>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mhdc/geometry.hpp"

namespace mhdc {

struct CascadeParams {
  int d = 3;
  long A = 2;
  double b = 2.0;
  std::optional<double> gamma;  ///< defaults via default_gamma
  long m_star = 3;
  int k_max = 1;
  int J_d = 22;
  double factor = 4.0;  ///< ratio that stands in for "much less than"
};

/// 1/2 when admissible, otherwise the midpoint of (b^{-1/J_d}, 1).
double default_gamma(double b, int J_d);

/// Least m with m * eta integral for every working direction of every set.
long compute_m_star(const std::vector<FrameSet>& sets, bool include_seed = false);

enum class OrderingKind { Monotone, Separation, Time };

struct OrderingCheck {
  OrderingKind kind = OrderingKind::Monotone;
  std::string name;
  int j = 0, k = 0;
  double log_ratio = 0.0;  ///< natural log of the achieved ratio (larger is better)
  bool holds = false;
};

struct ScalePlan {
  CascadeParams params;
  double gamma = 0.5;
  std::map<std::pair<int, int>, mpz_class> N;  ///< (j,k), k = 0..k_max+1
  std::map<std::pair<int, int>, mpz_class> M;  ///< (j,k), k = 1..k_max+1
  std::map<int, double> t;                     ///< k = 1..k_max
  std::map<int, double> ell;                   ///< k = 1..k_max
  std::vector<OrderingCheck> ordering;

  bool has_N(int j, int k) const { return N.count({j, k}) != 0; }
  const mpz_class& n_at(int j, int k) const;
  const mpz_class& m_at(int j, int k) const;
  double nd(int j, int k) const { return n_at(j, k).get_d(); }
  double md(int j, int k) const { return m_at(j, k).get_d(); }
  bool orderings_hold() const;
};

ScalePlan build_plan(const CascadeParams& p);

struct SeparationReport {
  double factor = 1.0;
  std::vector<OrderingCheck> checks;
  bool pass = true;
};

/// Re-evaluates the N/M separation inequalities against the given factor.
SeparationReport verify_separation(const ScalePlan& plan, double factor);

/// Throws OrderingViolated naming every failing inequality.
void require_orderings(const ScalePlan& plan);

/// Exact check that N_{j,k} eta^j is integral for k >= 1. Directions are
/// numbered over the concatenation of the given sets (working frames only).
bool integer_wavevectors(const ScalePlan& plan, const std::vector<FrameSet>& sets);

double log_mpz(const mpz_class& z);

nlohmann::json plan_to_json(const ScalePlan& plan);
std::string plan_csv(const ScalePlan& plan);

}  // namespace mhdc
