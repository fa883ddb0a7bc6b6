// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include "mhdc/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace mhdc::kernels {

namespace {

void mul_real_scalar(cplx* f, const double* m, std::size_t n) {
  double* p = reinterpret_cast<double*>(f);
  for (std::size_t i = 0; i < n; ++i) {
    p[2 * i] = p[2 * i] * m[i];
    p[2 * i + 1] = p[2 * i + 1] * m[i];
  }
}

void mul_real_to_scalar(cplx* out, const cplx* f, const double* m, std::size_t n) {
  double* o = reinterpret_cast<double*>(out);
  const double* p = reinterpret_cast<const double*>(f);
  for (std::size_t i = 0; i < n; ++i) {
    o[2 * i] = p[2 * i] * m[i];
    o[2 * i + 1] = p[2 * i + 1] * m[i];
  }
}

void axpy_real_scalar(cplx* out, const cplx* f, const double* m, double s, std::size_t n) {
  double* o = reinterpret_cast<double*>(out);
  const double* p = reinterpret_cast<const double*>(f);
  for (std::size_t i = 0; i < n; ++i) {
    o[2 * i] = o[2 * i] + (p[2 * i] * m[i]) * s;
    o[2 * i + 1] = o[2 * i + 1] + (p[2 * i + 1] * m[i]) * s;
  }
}

void leray3_scalar(cplx* fx, cplx* fy, cplx* fz, const double* kx, const double* ky,
                   const double* kz, const double* inv_k2, std::size_t n) {
  double* x = reinterpret_cast<double*>(fx);
  double* y = reinterpret_cast<double*>(fy);
  double* z = reinterpret_cast<double*>(fz);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 2; ++c) {
      const std::size_t q = 2 * i + c;
      const double dot = ((kx[i] * x[q]) + (ky[i] * y[q])) + (kz[i] * z[q]);
      const double s = dot * inv_k2[i];
      x[q] = x[q] - kx[i] * s;
      y[q] = y[q] - ky[i] * s;
      z[q] = z[q] - kz[i] * s;
    }
  }
}

void mul_scalar(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_sub_scalar(double* out, const double* a, const double* b, const double* c,
                    const double* d, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (a[i] * b[i]) - (c[i] * d[i]);
}

void affine_scalar(double* out, double base, const double* coef, const double* const* in,
                   std::size_t nin, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = base;
    for (std::size_t k = 0; k < nin; ++k) acc = acc + coef[k] * in[k][i];
    out[i] = acc;
  }
}

double max_abs_scalar(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(a[i]));
  return m;
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(a[i] - b[i]));
  return m;
}

void sqdiff_acc_scalar(double* acc, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc[i] = acc[i] + d * d;
  }
}

const KernelTable kScalar{mul_real_scalar, mul_real_to_scalar, axpy_real_scalar,
                          leray3_scalar,   mul_scalar,         mul_sub_scalar,
                          affine_scalar,   max_abs_scalar,     max_abs_diff_scalar,
                          sqdiff_acc_scalar};

Backend initial_backend() {
  const char* env = std::getenv("MHDC_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Backend::Scalar;
  if (env != nullptr && std::strcmp(env, "avx2") == 0 && avx2_supported()) return Backend::Avx2;
  return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{initial_backend()};
  return slot;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

bool avx2_supported() { return __builtin_cpu_supports("avx2") != 0; }

const KernelTable& active() {
  return backend_slot().load(std::memory_order_relaxed) == Backend::Avx2 ? avx2_table()
                                                                         : scalar_table();
}

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

bool set_backend(Backend b) {
  if (b == Backend::Avx2 && !avx2_supported()) return false;
  backend_slot().store(b, std::memory_order_relaxed);
  return true;
}

std::string backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

}  // namespace mhdc::kernels
