// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "mhdc/errors.hpp"
#include "mhdc/kernels.hpp"
#include "mhdc/spectral.hpp"

namespace mhdc {

TorusGrid::TorusGrid(int dim, int points) : d(dim), n(points) {
  if (d != 2 && d != 3) throw Error("TorusGrid: dimension must be 2 or 3");
  if (n < 4 || n % 2 != 0) throw Error("TorusGrid: n must be even and at least 4");
}

std::size_t TorusGrid::real_size() const {
  std::size_t s = 1;
  for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(n);
  return s;
}

std::size_t TorusGrid::spec_size() const {
  std::size_t s = static_cast<std::size_t>(half());
  for (int a = 0; a + 1 < d; ++a) s *= static_cast<std::size_t>(n);
  return s;
}

double TorusGrid::spacing() const { return 2.0 * std::numbers::pi / n; }

namespace {

struct GridKey {
  int d, n;
  bool operator<(const GridKey& o) const { return d != o.d ? d < o.d : n < o.n; }
};

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::unique_ptr<ModeTables> build_tables(const TorusGrid& g) {
  auto t = std::make_unique<ModeTables>();
  const std::size_t S = g.spec_size();
  for (int a = 0; a < 3; ++a) {
    t->ik[a].assign(S, 0);
    t->k[a].assign(S, 0.0);
  }
  t->k2.assign(S, 0.0);
  t->inv_k2.assign(S, 0.0);
  t->weight.assign(S, 1.0);
  t->nyquist.assign(S, 0);
  t->in_band.assign(S, 0);
  const int n = g.n, nh = g.half(), K = g.band();
  auto full = [n](int i) { return i < n / 2 ? i : i - n; };
  std::size_t idx = 0;
  const int n0 = n, n1 = g.d == 3 ? n : 1;
  for (int i0 = 0; i0 < n0; ++i0) {
    for (int i1 = 0; i1 < n1; ++i1) {
      for (int il = 0; il < nh; ++il, ++idx) {
        int kv[3] = {0, 0, 0};
        if (g.d == 3) {
          kv[0] = full(i0);
          kv[1] = full(i1);
          kv[2] = il;
        } else {
          kv[0] = full(i0);
          kv[1] = il;
        }
        bool nyq = false, band = true;
        double k2 = 0.0;
        for (int a = 0; a < g.d; ++a) {
          t->ik[a][idx] = kv[a];
          t->k[a][idx] = kv[a];
          k2 += static_cast<double>(kv[a]) * kv[a];
          if (std::abs(kv[a]) == n / 2) nyq = true;
          if (std::abs(kv[a]) > K) band = false;
        }
        t->k2[idx] = k2;
        t->nyquist[idx] = nyq ? 1 : 0;
        t->in_band[idx] = (band && !nyq) ? 1 : 0;
        t->inv_k2[idx] = (k2 > 0.0 && !nyq) ? 1.0 / k2 : 0.0;
        t->weight[idx] = (il == 0 || il == n / 2) ? 1.0 : 2.0;
      }
    }
  }
  return t;
}

struct Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  ~Plans() {
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

std::unique_ptr<Plans> build_plans(const TorusGrid& g) {
  auto p = std::make_unique<Plans>();
  std::vector<double> rbuf(g.real_size());
  std::vector<cplx> cbuf(g.spec_size());
  auto* cin = reinterpret_cast<fftw_complex*>(cbuf.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  if (g.d == 3) {
    p->r2c = fftw_plan_dft_r2c_3d(g.n, g.n, g.n, rbuf.data(), cin, flags);
    p->c2r = fftw_plan_dft_c2r_3d(g.n, g.n, g.n, cin, rbuf.data(), flags);
  } else {
    p->r2c = fftw_plan_dft_r2c_2d(g.n, g.n, rbuf.data(), cin, flags);
    p->c2r = fftw_plan_dft_c2r_2d(g.n, g.n, cin, rbuf.data(), flags);
  }
  if (!p->r2c || !p->c2r) throw Error("FFTW planning failed");
  return p;
}

const Plans& plans(const TorusGrid& g) {
  static std::map<GridKey, std::unique_ptr<Plans>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex());
  auto& slot = cache[GridKey{g.d, g.n}];
  if (!slot) slot = build_plans(g);
  return *slot;
}

}  // namespace

const ModeTables& modes(const TorusGrid& g) {
  static std::map<GridKey, std::unique_ptr<ModeTables>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex());
  auto& slot = cache[GridKey{g.d, g.n}];
  if (!slot) slot = build_tables(g);
  return *slot;
}

bool mode_index(const TorusGrid& g, const int* kv, std::size_t& index, bool& conjugate) {
  int k[3] = {0, 0, 0};
  for (int a = 0; a < g.d; ++a) {
    k[a] = kv[a];
    if (std::abs(k[a]) >= g.n / 2) return false;
  }
  conjugate = false;
  const int last = g.d - 1;
  if (k[last] < 0) {
    conjugate = true;
    for (int a = 0; a < g.d; ++a) k[a] = -k[a];
  }
  auto wrap = [&g](int v) { return v < 0 ? v + g.n : v; };
  if (g.d == 3) {
    index = (static_cast<std::size_t>(wrap(k[0])) * g.n + wrap(k[1])) * g.half() + k[2];
  } else {
    index = static_cast<std::size_t>(wrap(k[0])) * g.half() + k[1];
  }
  return true;
}

int rank_components(Rank r, int d) {
  switch (r) {
    case Rank::Scalar: return 1;
    case Rank::Vector: return d;
    case Rank::Tensor: return d * d;
  }
  return 1;
}

PhysicalField::PhysicalField(const TorusGrid& g, Rank r)
    : grid(g), rank(r), ncomp(rank_components(r, g.d)), data(g.real_size() * ncomp, 0.0) {}

PhysicalField to_physical(const SpectralField& f) {
  const TorusGrid& g = f.grid();
  PhysicalField p(g, f.rank());
  const Plans& pl = plans(g);
  std::vector<cplx> scratch(g.spec_size());
  for (int c = 0; c < f.ncomp(); ++c) {
    std::copy(f.comp(c), f.comp(c) + g.spec_size(), scratch.begin());
    fftw_execute_dft_c2r(pl.c2r, reinterpret_cast<fftw_complex*>(scratch.data()), p.comp(c));
  }
  return p;
}

SpectralField to_spectral(const PhysicalField& p, bool dealias) {
  const TorusGrid& g = p.grid;
  SpectralField f(g, p.rank);
  const Plans& pl = plans(g);
  const ModeTables& mt = modes(g);
  std::vector<double> scratch(g.real_size());
  const double inv = 1.0 / static_cast<double>(g.real_size());
  for (int c = 0; c < f.ncomp(); ++c) {
    std::copy(p.comp(c), p.comp(c) + g.real_size(), scratch.begin());
    fftw_execute_dft_r2c(pl.r2c, scratch.data(), reinterpret_cast<fftw_complex*>(f.comp(c)));
    cplx* out = f.comp(c);
    for (std::size_t i = 0; i < g.spec_size(); ++i) {
      const bool keep = dealias ? mt.in_band[i] != 0 : mt.nyquist[i] == 0;
      out[i] = keep ? out[i] * inv : cplx(0.0, 0.0);
    }
  }
  return f;
}

SpectralField outer(const SpectralField& u, const SpectralField& v) {
  if (u.rank() != Rank::Vector || v.rank() != Rank::Vector || u.grid() != v.grid())
    throw Error("outer: vector fields on one grid required");
  const TorusGrid& g = u.grid();
  const PhysicalField pu = to_physical(u);
  const PhysicalField pv = to_physical(v);
  PhysicalField out(g, Rank::Tensor);
  const auto& K = kernels::active();
  for (int a = 0; a < g.d; ++a)
    for (int b = 0; b < g.d; ++b) K.mul(out.comp(a * g.d + b), pu.comp(a), pv.comp(b), g.real_size());
  return to_spectral(out);
}

SpectralField outer_diff(const SpectralField& u, const SpectralField& v, const SpectralField& p,
                         const SpectralField& q) {
  const TorusGrid& g = u.grid();
  const PhysicalField pu = to_physical(u), pv = to_physical(v);
  const PhysicalField pp = to_physical(p), pq = to_physical(q);
  PhysicalField out(g, Rank::Tensor);
  const auto& K = kernels::active();
  for (int a = 0; a < g.d; ++a)
    for (int b = 0; b < g.d; ++b)
      K.mul_sub(out.comp(a * g.d + b), pu.comp(a), pv.comp(b), pp.comp(a), pq.comp(b),
                g.real_size());
  return to_spectral(out);
}

SpectralField multiply(const SpectralField& scalar, const SpectralField& f) {
  if (scalar.rank() != Rank::Scalar) throw Error("multiply: first argument must be scalar");
  const TorusGrid& g = f.grid();
  const PhysicalField ps = to_physical(scalar);
  PhysicalField pf = to_physical(f);
  const auto& K = kernels::active();
  for (int c = 0; c < pf.ncomp; ++c) K.mul(pf.comp(c), pf.comp(c), ps.comp(0), g.real_size());
  return to_spectral(pf);
}

}  // namespace mhdc
