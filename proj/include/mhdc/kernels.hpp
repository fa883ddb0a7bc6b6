// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <string>

namespace mhdc::kernels {

using cplx = std::complex<double>;

enum class Backend { Scalar, Avx2 };

/// Table of data-parallel inner loops. Every entry has a scalar reference
/// implementation and an AVX2 variant that rounds identically (no FMA).
struct KernelTable {
  /// f[i] *= m[i] for complex f and real m.
  void (*mul_real)(cplx* f, const double* m, std::size_t n);
  /// out[i] = f[i] * m[i].
  void (*mul_real_to)(cplx* out, const cplx* f, const double* m, std::size_t n);
  /// out[i] += s * f[i] * m[i] (computed as (f*m)*s then added).
  void (*axpy_real)(cplx* out, const cplx* f, const double* m, double s, std::size_t n);
  /// Leray projection of one vector of modes: f -= k (k.f) / |k|^2.
  void (*leray3)(cplx* fx, cplx* fy, cplx* fz, const double* kx, const double* ky,
                 const double* kz, const double* inv_k2, std::size_t n);
  /// out[i] = a[i] * b[i].
  void (*mul)(double* out, const double* a, const double* b, std::size_t n);
  /// out[i] = a[i] * b[i] - c[i] * d[i].
  void (*mul_sub)(double* out, const double* a, const double* b, const double* c,
                  const double* d, std::size_t n);
  /// out[i] = base + sum_k coef[k] * in[k][i], summed in ascending k.
  void (*affine)(double* out, double base, const double* coef, const double* const* in,
                 std::size_t nin, std::size_t n);
  /// max_i |a[i]|.
  double (*max_abs)(const double* a, std::size_t n);
  /// max_i |a[i] - b[i]|.
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
  /// acc[i] += (a[i] - b[i])^2.
  void (*sqdiff_acc)(double* acc, const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table();
const KernelTable& avx2_table();

/// Active table. Chosen once from the MHDC_SIMD environment variable
/// ("scalar" or "avx2") or, when unset, from the CPU feature flags.
const KernelTable& active();
Backend active_backend();
/// Forces a backend; returns false if it is not supported on this CPU.
bool set_backend(Backend b);
bool avx2_supported();
std::string backend_name(Backend b);

}  // namespace mhdc::kernels
