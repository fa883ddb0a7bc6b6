// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <string>
#include <vector>

#include "mhdc/principal.hpp"
#include "mhdc/spectral.hpp"

namespace mhdc {

enum class BackgroundKind { Zero, Beltrami };

/// Smooth classical pair (U, H) in the working frame. The Beltrami option is
/// U = a exp(-t) (sin z, cos z, 0), H = b exp(-t) (cos z, sin z, 0), for which
/// every quadratic term of the system vanishes.
struct Background {
  BackgroundKind kind = BackgroundKind::Zero;
  double a = 0.0, b = 0.0;

  bool is_zero() const { return kind == BackgroundKind::Zero || (a == 0.0 && b == 0.0); }
  SpectralField U(const TorusGrid& g, double t) const;
  SpectralField H(const TorusGrid& g, double t) const;
};

Background background_from_name(const std::string& name, double a, double b);

struct XYNorms {
  double x_norm = 0.0;
  double y_norm = 0.0;
};

/// sup |f|, sup |grad f| and the Hoelder seminorm of grad f at one time.
struct NormPieces {
  double sup = 0.0;
  double grad_sup = 0.0;
  double grad_holder = 0.0;
};

NormPieces norm_pieces(const SpectralField& f, double kappa, int lag = 8);

/// Discrete Hoelder seminorm of a nodal field: max over grid pairs whose cell
/// offsets satisfy |delta_i| <= lag of |f(x + delta) - f(x)| / |delta h|^kappa,
/// with |.| the Frobenius norm over components.
double holder_seminorm(const PhysicalField& f, double kappa, int lag = 8);

/// Both weighted suprema of a sampled field sequence.
XYNorms xy_norm(const std::vector<double>& times, const std::vector<SpectralField>& fields, double alpha,
                double kappa, int lag = 8);

struct CorrectorOptions {
  double t_start = 0.0;
  double horizon = 0.25;
  int steps_per_octave = 16;
  int norm_per_octave = 2;
  int iterates = 10;
  double alpha = 0.05;
  double kappa = 0.1;
  int lag = 8;
  double cfl = 0.5;  ///< step <= cfl / (band * sup(|v~| + |h~|))
  Background background;
  bool stop_on_divergence = true;
  bool keep_final = true;
};

/// Corrector (w, zeta) sampled at the step times.
struct CorrectorState {
  std::vector<double> times;
  std::vector<SpectralField> w, zeta;
  Background background;
  double T_bar = 0.0;
};

struct PicardReport {
  double t_start = 0.0, T_bar = 0.0;
  int steps = 0;
  double max_step = 0.0, min_step = 0.0;
  std::vector<double> norm_times;
  /// distances[m] = X distance between iterates m+1 and m (iterate 0 is zero).
  std::vector<double> distances;
  /// ratios[m] = distances[m+1] / distances[m].
  std::vector<double> ratios;
  double source_y_norm = 0.0;  ///< Y norm of Psi(0, 0)
  double last_x_norm = 0.0;    ///< X norm of iterate `iterates`
  double fixed_point_residual = 0.0;  ///< X distance of the last map, relative to last_x_norm
  double divergence = 0.0;     ///< max L2 |div w| relative to max L2 |grad w|
  bool ratios_below_half = false;  ///< every ratio after iterate 2 is <= 1/2
  bool monotone = false;           ///< ratios non-increasing after iterate 2
  CorrectorState state;            ///< the last computed iterate
};

/// Picard iteration of the mild corrector map. Iterate m+1 solves the linear
/// system with coefficients (U + v, H + h) driven by Psi of iterate m, by a
/// Lawson integrating-factor RK4 scheme on a geometric step grid. All iterates
/// are advanced together in one time sweep.
PicardReport picard_iterate(const TimeFields& principal, const TorusGrid& g, const CorrectorOptions& opt);

/// N0 v(N0 x): every mode k moves to N0 k and is multiplied by N0.
SpectralField rescale_field(const SpectralField& f, int N0);

struct AssembledSolution {
  std::vector<double> times;
  std::vector<SpectralField> u, B;
};

/// u = U + v^{N0} + w^{N0}, B = H + h^{N0} + zeta^{N0} at the times t = s / N0^2
/// for every stored corrector time s.
AssembledSolution assemble_solution(const TimeFields& principal, const CorrectorState& corrector, int N0,
                                    const Background& background);

/// Unforced residual of an assembled pair on its own sample times, relative to
/// the largest L2 norm of Lap u.
double end_to_end_residual(const AssembledSolution& s);

}  // namespace mhdc
