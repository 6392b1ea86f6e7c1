// Copyright 2026 The dmecho Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Memory-kernel model for the inverse spin temperature of the 3/8 P subsystem:
//   d beta / dt = -int_0^t beta(t') G1(t' - t) dt'
// on a clock shifted by the kernel offset.

#include <string>
#include <vector>

#include "dme/experiments.hpp"
#include "dme/lattice.hpp"

namespace dme {

struct KernelSpec {
  enum class Kind { kGaussian, kTabulated };

  Kind kind = Kind::kGaussian;
  // Gaussian: G1(tau) = (n w_L)^2 exp(-M tau^2 / 2)
  double n = 0.0;
  double omega_l = 0.0;  // rad/s
  double m = 0.0;        // rad^2/s^2
  // Tabulated: linear interpolation in |tau| over increasing, non-negative times.
  std::vector<double> times;
  std::vector<double> values;
  double offset = 0.0;  // seconds before the kernel switches on

  static KernelSpec gaussian(double n, double omega_l, double m, double offset = 0.0);
  static KernelSpec tabulated(std::vector<double> times, std::vector<double> values,
                              double offset = 0.0);
  /// G1 == g over [0, horizon].
  static KernelSpec constant(double g, double horizon);

  void validate() const;
  double operator()(double tau) const;
  /// Largest |tau| the kernel is defined for.
  double horizon() const;
};

/// Measured second moments quoted for the three field orientations, s^-2.
double reference_second_moment(OrientationLabel label);

struct ThermoParams {
  double n = 0.45;
  double m_ratio = 0.25;   // M = m_ratio * M2
  double offset = 80e-6;   // seconds
};

/// Gaussian kernel with w_L = sqrt(M2 / 3) and M = m_ratio * M2.
KernelSpec gaussian_kernel_for(double second_moment, const ThermoParams& params = {});

struct SolverControl {
  double tolerance = 1e-6;  // max |beta_h - beta_{h/2}| on the common grid
  int max_refinements = 12;
};

struct BetaTrajectory {
  std::vector<double> times;  // seconds, from 0
  std::vector<double> beta;   // beta(0) = 1
  double step = 0.0;
  std::string method = "predictor-corrector/trapezoid";
  bool converged = false;
  int refinements = 0;
  double last_change = 0.0;
};

/// Solves from t = 0 to t_end starting at `step`, halving the step until
/// two successive solutions agree to the tolerance. Throws ConvergenceError
/// when the refinement budget runs out.
BetaTrajectory solve_beta(const KernelSpec& kernel, double t_end, double step,
                          const SolverControl& control = {});

/// Single fixed-step solve, no refinement.
BetaTrajectory solve_beta_fixed(const KernelSpec& kernel, double t_end, double step);

/// Least-squares c in 1 - beta(t) = c t^2 on t in [0, 0.1 / sqrt(M)] after
/// the offset; (n w_L)^2 / 2 to leading order.
double short_time_check(const KernelSpec& kernel);

struct MicroscopicKernel {
  KernelSpec kernel;
  double g0_raw = 0.0;        // G1(0) as evaluated, before any sign flip
  bool sign_flipped = false;  // set when G1(0) came out negative
  double max_imag = 0.0;      // max |Im G1| / |G1(0)|
  double asymmetry = 0.0;     // max |G1(tau) - G1(-tau)| / |G1(0)|
};

/// Evaluates the pair-resolved correlation kernel of a cluster (N <= 8) on a
/// non-negative, increasing tau grid.
MicroscopicKernel microscopic_kernel(const SpinCluster& cluster, const std::vector<double>& taus);

/// M from |G(tau)/G(0)| ~ exp(-M tau^2 / 2), fitted over points with ratio > floor.
double fit_gaussian_decay(const std::vector<double>& taus, const std::vector<double>& values,
                          double floor = 0.3);

/// amplitude(t1) = a_ideal * beta(t1).
SignalCurve thermo_signal(const BetaTrajectory& trajectory, double a_ideal);

}  // namespace dme
