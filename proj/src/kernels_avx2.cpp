// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <immintrin.h>

#include <cmath>

#include "mhdc/kernels.hpp"

namespace mhdc::kernels {

namespace {

// Duplicates two real multipliers into [m0, m0, m1, m1].
inline __m256d dup_pair(const double* m) {
  const __m128d two = _mm_loadu_pd(m);
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(two), 0x50);
}

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

void mul_real_avx2(cplx* f, const double* m, std::size_t n) {
  double* p = reinterpret_cast<double*>(f);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d v = _mm256_loadu_pd(p + 2 * i);
    _mm256_storeu_pd(p + 2 * i, _mm256_mul_pd(v, dup_pair(m + i)));
  }
  for (; i < n; ++i) {
    p[2 * i] = p[2 * i] * m[i];
    p[2 * i + 1] = p[2 * i + 1] * m[i];
  }
}

void mul_real_to_avx2(cplx* out, const cplx* f, const double* m, std::size_t n) {
  double* o = reinterpret_cast<double*>(out);
  const double* p = reinterpret_cast<const double*>(f);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d v = _mm256_loadu_pd(p + 2 * i);
    _mm256_storeu_pd(o + 2 * i, _mm256_mul_pd(v, dup_pair(m + i)));
  }
  for (; i < n; ++i) {
    o[2 * i] = p[2 * i] * m[i];
    o[2 * i + 1] = p[2 * i + 1] * m[i];
  }
}

void axpy_real_avx2(cplx* out, const cplx* f, const double* m, double s, std::size_t n) {
  double* o = reinterpret_cast<double*>(out);
  const double* p = reinterpret_cast<const double*>(f);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d v = _mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(p + 2 * i), dup_pair(m + i)), vs);
    _mm256_storeu_pd(o + 2 * i, _mm256_add_pd(_mm256_loadu_pd(o + 2 * i), v));
  }
  for (; i < n; ++i) {
    o[2 * i] = o[2 * i] + (p[2 * i] * m[i]) * s;
    o[2 * i + 1] = o[2 * i + 1] + (p[2 * i + 1] * m[i]) * s;
  }
}

void leray3_avx2(cplx* fx, cplx* fy, cplx* fz, const double* kx, const double* ky,
                 const double* kz, const double* inv_k2, std::size_t n) {
  double* x = reinterpret_cast<double*>(fx);
  double* y = reinterpret_cast<double*>(fy);
  double* z = reinterpret_cast<double*>(fz);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vkx = dup_pair(kx + i);
    const __m256d vky = dup_pair(ky + i);
    const __m256d vkz = dup_pair(kz + i);
    const __m256d vik = dup_pair(inv_k2 + i);
    __m256d vx = _mm256_loadu_pd(x + 2 * i);
    __m256d vy = _mm256_loadu_pd(y + 2 * i);
    __m256d vz = _mm256_loadu_pd(z + 2 * i);
    __m256d dot = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(vkx, vx), _mm256_mul_pd(vky, vy)),
                                _mm256_mul_pd(vkz, vz));
    __m256d s = _mm256_mul_pd(dot, vik);
    _mm256_storeu_pd(x + 2 * i, _mm256_sub_pd(vx, _mm256_mul_pd(vkx, s)));
    _mm256_storeu_pd(y + 2 * i, _mm256_sub_pd(vy, _mm256_mul_pd(vky, s)));
    _mm256_storeu_pd(z + 2 * i, _mm256_sub_pd(vz, _mm256_mul_pd(vkz, s)));
  }
  for (; i < n; ++i) {
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

void mul_avx2(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_sub_avx2(double* out, const double* a, const double* b, const double* c,
                  const double* d, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    __m256d cd = _mm256_mul_pd(_mm256_loadu_pd(c + i), _mm256_loadu_pd(d + i));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(ab, cd));
  }
  for (; i < n; ++i) out[i] = (a[i] * b[i]) - (c[i] * d[i]);
}

void affine_avx2(double* out, double base, const double* coef, const double* const* in,
                 std::size_t nin, std::size_t n) {
  std::size_t i = 0;
  const __m256d vb = _mm256_set1_pd(base);
  for (; i + 4 <= n; i += 4) {
    __m256d acc = vb;
    for (std::size_t k = 0; k < nin; ++k)
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(coef[k]), _mm256_loadu_pd(in[k] + i)));
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    double acc = base;
    for (std::size_t k = 0; k < nin; ++k) acc = acc + coef[k] * in[k][i];
    out[i] = acc;
  }
}

double max_abs_avx2(const double* a, std::size_t n) {
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, abs_pd(_mm256_loadu_pd(a + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; i < n; ++i) r = std::fmax(r, std::fabs(a[i]));
  return r;
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    m = _mm256_max_pd(m, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; i < n; ++i) r = std::fmax(r, std::fabs(a[i] - b[i]));
  return r;
}

void sqdiff_acc_avx2(double* acc, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(d, d)));
  }
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc[i] = acc[i] + d * d;
  }
}

const KernelTable kAvx2{mul_real_avx2, mul_real_to_avx2, axpy_real_avx2,
                        leray3_avx2,   mul_avx2,         mul_sub_avx2,
                        affine_avx2,   max_abs_avx2,     max_abs_diff_avx2,
                        sqdiff_acc_avx2};

}  // namespace

const KernelTable& avx2_table() { return kAvx2; }

}  // namespace mhdc::kernels
