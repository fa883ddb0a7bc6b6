// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <cstdint>
#include <cstring>
#include <fstream>

#include "mhdc/errors.hpp"
#include "mhdc/spectral.hpp"

namespace mhdc {

namespace {

constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError("truncated snapshot header");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ofstream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::ifstream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw IoError("truncated snapshot body");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

// Iterates the full n^d mode grid in row-major FFT order.
template <class F>
void for_each_full_mode(const TorusGrid& g, F&& f) {
  auto wn = [&g](int i) { return i < g.n / 2 ? i : i - g.n; };
  if (g.d == 3) {
    for (int i0 = 0; i0 < g.n; ++i0)
      for (int i1 = 0; i1 < g.n; ++i1)
        for (int i2 = 0; i2 < g.n; ++i2) {
          int kv[3] = {wn(i0), wn(i1), wn(i2)};
          f(kv);
        }
  } else {
    for (int i0 = 0; i0 < g.n; ++i0)
      for (int i1 = 0; i1 < g.n; ++i1) {
        int kv[3] = {wn(i0), wn(i1), 0};
        f(kv);
      }
  }
}

}  // namespace

void write_snapshot(const std::string& path, const SpectralField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path);
  const TorusGrid& g = f.grid();
  os.write("MHDC", 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(g.d));
  put_u32(os, static_cast<std::uint32_t>(g.n));
  put_u32(os, static_cast<std::uint32_t>(f.rank()));
  put_u32(os, 1u);
  for (int c = 0; c < f.ncomp(); ++c) {
    for_each_full_mode(g, [&](const int* kv) {
      std::size_t i;
      bool conj;
      cplx v(0.0, 0.0);
      if (mode_index(g, kv, i, conj)) v = conj ? std::conj(f.comp(c)[i]) : f.comp(c)[i];
      put_f64(os, v.real());
      put_f64(os, v.imag());
    });
  }
  if (!os) throw IoError("write failed for " + path);
}

SpectralField read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "MHDC", 4) != 0) throw IoError("bad snapshot magic in " + path);
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) throw IoError("unsupported snapshot version");
  const int d = static_cast<int>(get_u32(is));
  const int n = static_cast<int>(get_u32(is));
  const auto rank = static_cast<Rank>(get_u32(is));
  get_u32(is);
  TorusGrid g(d, n);
  SpectralField f(g, rank);
  for (int c = 0; c < f.ncomp(); ++c) {
    for_each_full_mode(g, [&](const int* kv) {
      const double re = get_f64(is);
      const double im = get_f64(is);
      std::size_t i;
      bool conj;
      if (mode_index(g, kv, i, conj) && !conj) f.comp(c)[i] = cplx(re, im);
    });
  }
  return f;
}

}  // namespace mhdc
