// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include "mhdc/geometry.hpp"

#include <cmath>
#include <limits>

#include "mhdc/errors.hpp"

namespace mhdc {

// ----------------------------------------------------------------------------
// Tensor containers

SymTensor SymTensor::from_matrix(const Mat3& m) {
  SymTensor s;
  s.e = {m[0][0], m[1][1], m[2][2], 0.5 * (m[0][1] + m[1][0]), 0.5 * (m[0][2] + m[2][0]),
         0.5 * (m[1][2] + m[2][1])};
  return s;
}

SymTensor SymTensor::identity() {
  SymTensor s;
  s.e = {1, 1, 1, 0, 0, 0};
  return s;
}

Mat3 SymTensor::matrix() const {
  return Mat3{{{e[0], e[3], e[4]}, {e[3], e[1], e[5]}, {e[4], e[5], e[2]}}};
}

SkewTensor SkewTensor::from_matrix(const Mat3& m) {
  SkewTensor s;
  s.e = {0.5 * (m[0][1] - m[1][0]), 0.5 * (m[0][2] - m[2][0]), 0.5 * (m[1][2] - m[2][1])};
  return s;
}

Mat3 SkewTensor::matrix() const {
  return Mat3{{{0, e[0], e[1]}, {-e[0], 0, e[2]}, {-e[1], -e[2], 0}}};
}

double frobenius(const Mat3& m) {
  double s = 0.0;
  for (const auto& r : m)
    for (double v : r) s += v * v;
  return std::sqrt(s);
}

Mat3 identity3() { return Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

std::array<double, 3> to_double(const QVec3& v) {
  return {v[0].get_d(), v[1].get_d(), v[2].get_d()};
}

mpq_class dot(const QVec3& a, const QVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// ----------------------------------------------------------------------------
// Exact linear algebra

mpq_class exact_det(QMatrix m) {
  const std::size_t n = m.size();
  mpq_class det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      std::swap(m[p], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      if (m[r][c] == 0) continue;
      const mpq_class f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

QMatrix exact_inverse(QMatrix m) {
  const std::size_t n = m.size();
  QMatrix inv(n, std::vector<mpq_class>(n, 0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) throw Error("exact_inverse: singular matrix");
    std::swap(m[p], m[c]);
    std::swap(inv[p], inv[c]);
    const mpq_class piv = m[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      m[c][k] /= piv;
      inv[c][k] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c] == 0) continue;
      const mpq_class f = m[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        m[r][k] -= f * m[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

namespace {

// Coordinates of a (x) a in (xx, yy, zz, xy, xz, yz).
std::vector<mpq_class> sym_coords(const QVec3& a) {
  return {a[0] * a[0], a[1] * a[1], a[2] * a[2], a[0] * a[1], a[0] * a[2], a[1] * a[2]};
}

// Coordinates of eta1 (x) eta1 - eta2 (x) eta2 in (xx, yy, xy, xz, yz).
std::vector<mpq_class> traceless_coords(const Frame& f) {
  const QVec3& a = f.eta1;
  const QVec3& b = f.eta2;
  return {a[0] * a[0] - b[0] * b[0], a[1] * a[1] - b[1] * b[1], a[0] * a[1] - b[0] * b[1],
          a[0] * a[2] - b[0] * b[2], a[1] * a[2] - b[1] * b[2]};
}

// Coordinates of eta1 (x) eta2 - eta2 (x) eta1 in (12, 13, 23).
std::vector<mpq_class> skew_coords(const Frame& f) {
  const QVec3& a = f.eta1;
  const QVec3& b = f.eta2;
  return {a[0] * b[1] - b[0] * a[1], a[0] * b[2] - b[0] * a[2], a[1] * b[2] - b[1] * a[2]};
}

// Builds a matrix whose columns are the given vectors.
QMatrix columns(const std::vector<std::vector<mpq_class>>& cols) {
  const std::size_t rows = cols.front().size();
  QMatrix m(rows, std::vector<mpq_class>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows; ++i) m[i][j] = cols[j][i];
  return m;
}

bool same(const QVec3& a, const QVec3& b) { return a[0] == b[0] && a[1] == b[1] && a[2] == b[2]; }

QVec3 negated(const QVec3& v) { return QVec3{-v[0], -v[1], -v[2]}; }

std::size_t half_count(const FrameSet& fs) {
  switch (fs.kind) {
    case FrameKind::LambdaB10: return 5;
    case FrameKind::LambdaB16: return 8;
    default: return fs.frames.size();
  }
}

void require_kind(const FrameSet& fs, FrameKind k, const char* op) {
  if (fs.kind != k || fs.frames.size() != (k == FrameKind::LambdaB10 ? 10u : k == FrameKind::LambdaB16 ? 16u : fs.frames.size()))
    throw Error(std::string(op) + ": frame set of kind " + kind_name(k) + " required");
}

// Inverse Frobenius metric on the coordinate systems, used for dual norms.
std::vector<double> inverse_metric(int system) {
  // system 0: symmetric 6, 1: traceless 5, 2: skew 3, 3: coupled 8.
  auto diag = [](std::vector<double> d) {
    const std::size_t n = d.size();
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] = d[i];
    return m;
  };
  switch (system) {
    case 0: return diag({1, 1, 1, 0.5, 0.5, 0.5});
    case 1: {
      auto m = diag({0, 0, 0.5, 0.5, 0.5});
      m[0] = 2.0 / 3.0;
      m[1] = -1.0 / 3.0;
      m[5] = -1.0 / 3.0;
      m[6] = 2.0 / 3.0;
      return m;
    }
    case 2: return diag({0.5, 0.5, 0.5});
    default: {
      auto m = diag({0, 0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
      m[0] = 2.0 / 3.0;
      m[1] = -1.0 / 3.0;
      m[8] = -1.0 / 3.0;
      m[9] = 2.0 / 3.0;
      return m;
    }
  }
}

void set_radius(AffineMap& am, int system) {
  const auto qi = inverse_metric(system);
  const int n = am.nin;
  double r = std::numeric_limits<double>::infinity();
  for (int i = 0; i < am.nout; ++i) {
    const double* l = &am.L[static_cast<std::size_t>(i) * n];
    double s = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) s += l[a] * qi[static_cast<std::size_t>(a) * n + b] * l[b];
    if (s <= 0.0) continue;
    r = std::min(r, (am.base[i] - 0.01) / std::sqrt(s));
  }
  am.radius = r;
}

// Paired construction: gamma_i = 1 + l_i/2 on generators, 1 - l_i/2 on partners.
AffineMap paired_map(const QMatrix& inv, std::size_t half, std::size_t total,
                     const std::vector<std::size_t>& gens) {
  AffineMap am;
  am.nin = static_cast<int>(inv.size());
  am.nout = static_cast<int>(total);
  am.base.assign(total, 1.0);
  am.L.assign(total * am.nin, 0.0);
  for (std::size_t r = 0; r < gens.size(); ++r) {
    const std::size_t i = gens[r];
    for (int c = 0; c < am.nin; ++c) {
      const double v = 0.5 * inv[r][c].get_d();
      am.L[i * am.nin + c] = v;
      am.L[(i + half) * am.nin + c] = -v;
    }
  }
  return am;
}

std::vector<double> apply(const AffineMap& am, const double* x) {
  std::vector<double> g(am.nout);
  for (int i = 0; i < am.nout; ++i) {
    double s = am.base[i];
    for (int c = 0; c < am.nin; ++c) s += am.L[static_cast<std::size_t>(i) * am.nin + c] * x[c];
    g[i] = s;
  }
  return g;
}

void require_positive(const std::vector<double>& g, const char* op) {
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(g[i] > 0.0))
      throw OutOfBall(std::string(op) + ": coefficient " + std::to_string(i + 1) + " = " +
                      std::to_string(g[i]));
}

}  // namespace

std::vector<mpq_class> coupled_generator(const Frame& f) {
  auto t = traceless_coords(f);
  const auto s = skew_coords(f);
  t.insert(t.end(), s.begin(), s.end());
  return t;
}

// ----------------------------------------------------------------------------
// Validation

ValidationReport validate_frames(const FrameSet& fs) {
  ValidationReport rep;
  rep.kind = fs.kind;
  auto fail = [&rep](const std::string& s) { rep.failures.push_back(s); };

  auto check_on = [&](const Frame& f, const std::string& label) {
    const QVec3* v[3] = {&f.eta, &f.eta1, &f.eta2};
    for (int a = 0; a < 3; ++a) {
      if (dot(*v[a], *v[a]) != 1) {
        rep.orthonormal = false;
        fail(label + ": vector " + std::to_string(a) + " not of unit length");
      }
      for (int b = a + 1; b < 3; ++b)
        if (dot(*v[a], *v[b]) != 0) {
          rep.orthonormal = false;
          fail(label + ": vectors " + std::to_string(a) + "," + std::to_string(b) + " not orthogonal");
        }
    }
  };
  for (std::size_t i = 0; i < fs.frames.size(); ++i) check_on(fs.frames[i], "frame " + std::to_string(i + 1));
  if (fs.seed) check_on(*fs.seed, "seed frame");

  auto disjoint_from = [&](const FrameSet& other) {
    for (const auto& a : fs.frames)
      for (const auto& b : other.frames)
        if (same(a.eta, b.eta) || same(a.eta, negated(b.eta))) {
          rep.disjoint = false;
          fail("direction shared with " + kind_name(other.kind));
          return;
        }
  };

  if (fs.kind == FrameKind::LambdaU) {
    disjoint_from(builtin_lambda_B(10));
    disjoint_from(builtin_lambda_B(16));
    if (fs.frames.size() != 6) {
      fail("LambdaU certificate requires exactly 6 frames");
      return rep;
    }
    std::vector<std::vector<mpq_class>> cols;
    for (const auto& f : fs.frames) cols.push_back(sym_coords(f.eta1));
    const QMatrix V = columns(cols);
    if (exact_det(V) == 0) {
      fail("rank-one matrices do not span Sym3");
      return rep;
    }
    rep.basis = true;
    const QMatrix inv = exact_inverse(V);
    const mpq_class id[6] = {1, 1, 1, 0, 0, 0};
    rep.positive_id_weights = true;
    for (std::size_t i = 0; i < 6; ++i) {
      mpq_class w = 0;
      for (std::size_t c = 0; c < 6; ++c) w += inv[i][c] * id[c];
      rep.id_weights.push_back(w);
      if (w <= 0) rep.positive_id_weights = false;
    }
    if (!rep.positive_id_weights) fail("identity weights not strictly positive");
    return rep;
  }

  const std::size_t m = half_count(fs);
  if (fs.frames.size() != 2 * m) {
    rep.pair_structure = false;
    fail("wrong number of frames for " + kind_name(fs.kind));
    return rep;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const Frame& a = fs.frames[i];
    const Frame& b = fs.frames[i + m];
    if (!same(b.eta, negated(a.eta)) || !same(b.eta1, a.eta2) || !same(b.eta2, a.eta1)) {
      rep.pair_structure = false;
      fail("frame " + std::to_string(i + m + 1) + " is not the partner of frame " + std::to_string(i + 1));
    }
  }
  disjoint_from(default_lambda_u());

  if (fs.kind == FrameKind::LambdaB16) {
    std::vector<std::vector<mpq_class>> cols;
    for (std::size_t i = 0; i < m; ++i) cols.push_back(coupled_generator(fs.frames[i]));
    const mpq_class det = exact_det(columns(cols));
    rep.determinant = det;
    rep.basis = det != 0;
    if (!rep.basis) fail("coupled generators are linearly dependent");
  } else {
    std::vector<std::vector<mpq_class>> tc, sc;
    for (std::size_t i = 0; i < 5; ++i) tc.push_back(traceless_coords(fs.frames[i]));
    for (std::size_t i = 0; i < 3; ++i) sc.push_back(skew_coords(fs.frames[i]));
    const bool t_ok = exact_det(columns(tc)) != 0;
    const bool s_ok = exact_det(columns(sc)) != 0;
    rep.basis = t_ok && s_ok;
    if (!t_ok) fail("T1..T5 are linearly dependent");
    if (!s_ok) fail("S1..S3 are linearly dependent");
  }
  return rep;
}

// ----------------------------------------------------------------------------
// Affine coefficient maps

AffineMap symmetric_map(const FrameSet& fs) {
  if (fs.kind != FrameKind::LambdaU || fs.frames.size() != 6)
    throw Error("symmetric_map: LambdaU with 6 frames required");
  std::vector<std::vector<mpq_class>> cols;
  for (const auto& f : fs.frames) cols.push_back(sym_coords(f.eta1));
  const QMatrix inv = exact_inverse(columns(cols));
  AffineMap am;
  am.nin = 6;
  am.nout = 6;
  am.base.assign(6, 0.0);
  am.L.assign(36, 0.0);
  for (int i = 0; i < 6; ++i) {
    am.base[i] = mpq_class(inv[i][0] + inv[i][1] + inv[i][2]).get_d();
    for (int c = 0; c < 6; ++c) am.L[i * 6 + c] = inv[i][c].get_d();
  }
  set_radius(am, 0);
  return am;
}

AffineMap traceless_map(const FrameSet& fs) {
  require_kind(fs, FrameKind::LambdaB10, "traceless_map");
  std::vector<std::vector<mpq_class>> cols;
  for (std::size_t i = 0; i < 5; ++i) cols.push_back(traceless_coords(fs.frames[i]));
  AffineMap am = paired_map(exact_inverse(columns(cols)), 5, 10, {0, 1, 2, 3, 4});
  set_radius(am, 1);
  return am;
}

AffineMap skew_map(const FrameSet& fs) {
  require_kind(fs, FrameKind::LambdaB10, "skew_map");
  std::vector<std::vector<mpq_class>> cols;
  for (std::size_t i = 0; i < 3; ++i) cols.push_back(skew_coords(fs.frames[i]));
  AffineMap am = paired_map(exact_inverse(columns(cols)), 5, 10, {0, 1, 2});
  set_radius(am, 2);
  return am;
}

AffineMap coupled_map(const FrameSet& fs) {
  require_kind(fs, FrameKind::LambdaB16, "coupled_map");
  std::vector<std::vector<mpq_class>> cols;
  for (std::size_t i = 0; i < 8; ++i) cols.push_back(coupled_generator(fs.frames[i]));
  AffineMap am = paired_map(exact_inverse(columns(cols)), 8, 16, {0, 1, 2, 3, 4, 5, 6, 7});
  set_radius(am, 3);
  return am;
}

double certify_radius(const FrameSet& fs) {
  switch (fs.kind) {
    case FrameKind::LambdaU: return symmetric_map(fs).radius;
    case FrameKind::LambdaB10: return std::min(traceless_map(fs).radius, skew_map(fs).radius);
    case FrameKind::LambdaB16: return coupled_map(fs).radius;
  }
  return 0.0;
}

// ----------------------------------------------------------------------------
// Decompositions

Decomposition decompose_symmetric(const SymTensor& R, const FrameSet& fs) {
  const AffineMap am = symmetric_map(fs);
  const double x[6] = {R.e[0] - 1.0, R.e[1] - 1.0, R.e[2] - 1.0, R.e[3], R.e[4], R.e[5]};
  Decomposition d;
  d.gamma_sq = apply(am, x);
  require_positive(d.gamma_sq, "decompose_symmetric");
  return d;
}

Decomposition decompose_traceless(const SymTensor& R, const FrameSet& fs) {
  if (std::abs(R.trace()) > 1e-13) throw NotTraceless("decompose_traceless: trace " + std::to_string(R.trace()));
  const AffineMap am = traceless_map(fs);
  const double x[5] = {R.e[0], R.e[1], R.e[3], R.e[4], R.e[5]};
  Decomposition d;
  d.gamma_sq = apply(am, x);
  require_positive(d.gamma_sq, "decompose_traceless");
  return d;
}

Decomposition decompose_skew(const SkewTensor& G, const FrameSet& fs) {
  const AffineMap am = skew_map(fs);
  Decomposition d;
  d.gamma_sq = apply(am, G.e.data());
  require_positive(d.gamma_sq, "decompose_skew");
  return d;
}

Decomposition decompose_coupled(const SymTensor& R, const SkewTensor& G, const FrameSet& fs) {
  const AffineMap am = coupled_map(fs);
  const double p = R.trace() / 3.0;
  const double x[8] = {R.e[0] - p, R.e[1] - p, R.e[3], R.e[4], R.e[5], G.e[0], G.e[1], G.e[2]};
  Decomposition d;
  d.gamma_sq = apply(am, x);
  d.pressure = p;
  require_positive(d.gamma_sq, "decompose_coupled");
  return d;
}

// ----------------------------------------------------------------------------
// Reconstruction

namespace {

template <class F>
Mat3 accumulate(const Decomposition& dec, const FrameSet& fs, F&& term) {
  if (dec.gamma_sq.size() != fs.frames.size()) throw Error("reconstruct: size mismatch");
  Mat3 m{};
  for (std::size_t i = 0; i < fs.frames.size(); ++i) {
    const auto a = to_double(fs.frames[i].eta1);
    const auto b = to_double(fs.frames[i].eta2);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m[r][c] += dec.gamma_sq[i] * term(a, b, r, c);
  }
  return m;
}

}  // namespace

Mat3 reconstruct_symmetric(const Decomposition& dec, const FrameSet& fs) {
  return accumulate(dec, fs, [](const auto& a, const auto&, int r, int c) { return a[r] * a[c]; });
}

Mat3 reconstruct_traceless(const Decomposition& dec, const FrameSet& fs) {
  return accumulate(dec, fs,
                    [](const auto& a, const auto& b, int r, int c) { return a[r] * a[c] - b[r] * b[c]; });
}

Mat3 reconstruct_skew(const Decomposition& dec, const FrameSet& fs) {
  return accumulate(dec, fs,
                    [](const auto& a, const auto& b, int r, int c) { return a[r] * b[c] - b[r] * a[c]; });
}

}  // namespace mhdc
