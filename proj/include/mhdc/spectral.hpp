// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace mhdc {

using cplx = std::complex<double>;

/// Periodic grid on the torus [0, 2pi)^d with n points per axis.
///
/// Real fields are stored as half spectra: the last axis keeps the
/// wavenumbers 0..n/2, the other axes keep all n wavenumbers in FFT order.
/// The dealiasing band is the largest K with 3K < n; every field produced by
/// a product is truncated to |k_i| <= K on each axis.
struct TorusGrid {
  int d = 3;
  int n = 32;

  TorusGrid() = default;
  TorusGrid(int dim, int points);

  int band() const { return (n - 1) / 3; }
  int half() const { return n / 2 + 1; }
  std::size_t real_size() const;
  std::size_t spec_size() const;
  double spacing() const;
  bool operator==(const TorusGrid& o) const { return d == o.d && n == o.n; }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }
};

/// Per-grid wavenumber tables shared by all fields on that grid.
struct ModeTables {
  std::vector<int> ik[3];       ///< integer wavenumber per axis (0 for absent axes)
  std::vector<double> k[3];     ///< same, as double
  std::vector<double> k2;       ///< |k|^2
  std::vector<double> inv_k2;   ///< 1/|k|^2, 0 at the zero mode and Nyquist modes
  std::vector<double> weight;   ///< Hermitian multiplicity (1 or 2) of the half-spectrum entry
  std::vector<std::uint8_t> nyquist;  ///< true where some |k_i| == n/2
  std::vector<std::uint8_t> in_band;  ///< true where every |k_i| <= band
};

const ModeTables& modes(const TorusGrid& g);

/// Maps an integer wavevector to its half-spectrum index and conjugation flag.
/// Returns false when the wavevector is not representable (|k_i| >= n/2).
bool mode_index(const TorusGrid& g, const int* kv, std::size_t& index, bool& conjugate);

enum class Rank { Scalar = 0, Vector = 1, Tensor = 2 };

int rank_components(Rank r, int d);

/// Band-limited real-valued field with Fourier coefficients normalised so
/// that f(x) = sum_k fhat(k) exp(i k.x). Tensor component (a, b) is stored at
/// index a*d + b.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(const TorusGrid& g, Rank r);

  const TorusGrid& grid() const { return grid_; }
  Rank rank() const { return rank_; }
  int ncomp() const { return ncomp_; }
  std::size_t modes_per_comp() const { return grid_.spec_size(); }
  bool empty() const { return data_.empty(); }

  cplx* comp(int c) { return data_.data() + static_cast<std::size_t>(c) * grid_.spec_size(); }
  const cplx* comp(int c) const {
    return data_.data() + static_cast<std::size_t>(c) * grid_.spec_size();
  }
  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  SpectralField component(int c) const;
  void set_component(int c, const SpectralField& s);

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  void axpy(double s, const SpectralField& o);
  void set_zero();

 private:
  TorusGrid grid_;
  Rank rank_ = Rank::Scalar;
  int ncomp_ = 0;
  std::vector<cplx> data_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Nodal values of a field, component-major, row-major per component.
struct PhysicalField {
  TorusGrid grid;
  Rank rank = Rank::Scalar;
  int ncomp = 0;
  std::vector<double> data;

  PhysicalField() = default;
  PhysicalField(const TorusGrid& g, Rank r);
  double* comp(int c) { return data.data() + static_cast<std::size_t>(c) * grid.real_size(); }
  const double* comp(int c) const {
    return data.data() + static_cast<std::size_t>(c) * grid.real_size();
  }
};

PhysicalField to_physical(const SpectralField& f);
/// Forward transform of nodal values. With dealias, modes outside the band are dropped.
SpectralField to_spectral(const PhysicalField& p, bool dealias = true);

/// Dealiased pointwise products.
SpectralField outer(const SpectralField& u, const SpectralField& v);
/// u (x) v - p (x) q, evaluated in one pass.
SpectralField outer_diff(const SpectralField& u, const SpectralField& v, const SpectralField& p,
                         const SpectralField& q);
/// Scalar field times any field.
SpectralField multiply(const SpectralField& scalar, const SpectralField& f);

/// Drops every mode outside |k_i| <= K (and the Nyquist planes).
SpectralField truncate(const SpectralField& f, int K);
/// Moves a field to another grid of the same dimension, truncating if needed.
SpectralField resample(const SpectralField& f, const TorusGrid& target);
/// Sets Nyquist planes to zero in place.
void clear_nyquist(SpectralField& f);

// Norms. The L2 norm is the root mean square over the torus.
double l2_norm(const SpectralField& f);
double inner(const SpectralField& f, const SpectralField& g);
/// Max over grid nodes of the pointwise Euclidean (Frobenius) magnitude.
double sup_norm(const SpectralField& f);
double sup_norm(const PhysicalField& p);
/// Max over modes of |fhat|.
double max_coefficient(const SpectralField& f);

// Linear operators.
SpectralField heat(const SpectralField& f, double t);
SpectralField leray(const SpectralField& f);
SpectralField grad(const SpectralField& f);       ///< scalar -> vector, vector -> tensor (d_a f_b)
SpectralField div(const SpectralField& f);        ///< vector -> scalar, tensor -> vector (sum_a d_a T_ab)
SpectralField laplacian(const SpectralField& f);
SpectralField inv_laplacian(const SpectralField& f);  ///< zero mode dropped
SpectralField sym_grad(const SpectralField& f);   ///< (d_a f_b + d_b f_a)/2
SpectralField transpose(const SpectralField& t);
SpectralField trace(const SpectralField& t);
SpectralField times_identity(const SpectralField& s, int d);
SpectralField curl(const SpectralField& f);       ///< d = 3 only
SpectralField p_nonzero(const SpectralField& f);
SpectralField zero_mode_only(const SpectralField& f);

SpectralField op_D(const SpectralField& f);
SpectralField op_newD(const SpectralField& f);
SpectralField op_Ds(const SpectralField& f);
SpectralField op_calR(const SpectralField& f);
SpectralField op_calRs(const SpectralField& f);
SpectralField op_Q(const SpectralField& t);
SpectralField op_Qs(const SpectralField& t);

/// Smooth dyadic bump: psi(r) = theta(r) - theta(2r), theta a C-infinity step
/// equal to 1 on [0, 4/3] and 0 on [3/2, infinity).
double lp_bump(double r);
double lp_step(double r);
SpectralField littlewood_paley(const SpectralField& f, double N);
/// Sharp low-pass keeping |k| < N.
SpectralField low_pass(const SpectralField& f, double N);

/// Integral over [0, t] of exp(-lambda (t - s)) exp(-mu s) ds, evaluated stably.
double duhamel_coefficient(double lambda, double mu, double t);
/// Applies duhamel_coefficient(|k|^2, mu, t) per mode.
SpectralField duhamel_separable(const SpectralField& f, double mu, double t);

/// Applies a radial multiplier m(|k|^2) to every mode.
SpectralField apply_radial(const SpectralField& f, const std::function<double(double)>& m);

/// Random band-limited real field: Gaussian nodal noise projected to |k_i| <= K.
SpectralField random_field(const TorusGrid& g, Rank r, int K, std::mt19937_64& rng);

/// Single real Fourier mode amp * sin(k.x) (or cos) placed in component c.
SpectralField single_mode(const TorusGrid& g, Rank r, int c, const int* kv, double amp,
                          bool cosine);

// Binary snapshots (full mode grid, little endian).
void write_snapshot(const std::string& path, const SpectralField& f);
SpectralField read_snapshot(const std::string& path);

}  // namespace mhdc
