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

// Exact density-matrix evolution of a cluster through a propagation plan.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dme/operators.hpp"
#include "dme/pulseprog.hpp"
#include "dme/spectral.hpp"

namespace dme {

/// High-temperature state sigma = 1 - beta_scale * delta. `components`, when
/// present, are named parts of delta that are propagated alongside it so that
/// their signals can be reported separately.
struct DeviationState {
  CMatrix delta;
  double beta_scale = 1.0;
  std::vector<std::pair<std::string, CMatrix>> components;

  Eigen::Index dim() const { return delta.rows(); }
  /// Max |Tr delta| and max |delta - delta^dagger|, for invariant checks.
  double trace_error() const;
  double hermiticity_error() const;
};

struct Propagator {
  CMatrix matrix;
  std::string generator;
  double duration = 0.0;

  /// ||U U^dagger - 1||_F
  double unitarity_error() const;
};

/// exp(-i h t) from the Hermitian eigendecomposition of h.
Propagator expm(const Operator& h, double t);

struct AcquiredSignal {
  Axis observable = Axis::kX;
  double start = 0.0;  // plan time at the first sample, seconds
  std::vector<double> times;  // relative to the window start, seconds
  std::vector<double> total;
  std::vector<std::pair<std::string, std::vector<double>>> components;
};

struct EvolutionResult {
  DeviationState state;
  std::vector<AcquiredSignal> signals;
};

/// Holds the operators of one cluster and caches Hamiltonian spectra.
class Engine {
 public:
  explicit Engine(SpinCluster cluster);

  const SpinCluster& cluster() const { return cluster_; }
  int sites() const { return cluster_.size(); }
  const Operator& hd() const { return hd_; }
  const Operator& p() const { return p_; }
  const Operator& q() const { return q_; }
  const Operator& spin(Axis axis) const;

  CMatrix hamiltonian(const HamiltonianSpec& spec) const;
  const Spectrum& spectrum(const HamiltonianSpec& spec);

  /// dipolar/rotating: {Hd: H_d}; dipolar/tilted: {P: 3/8 P, Hd: -H_d/2};
  /// ix: {Ix: I_x}; seq2: {Hd: H_d/4, P: 3/16 P, Q: -3/8 Q}.
  DeviationState initial_state(InitKind kind, FrameKind frame) const;

  /// Plays the plan on `state`. Acquisition windows sample
  /// s(t) = Tr(delta(t) O) / (beta_scale Tr O^2) under H_d and advance the
  /// state by the window length.
  EvolutionResult evolve(DeviationState state, const PropagationPlan& plan);

 private:
  SpinCluster cluster_;
  Operator hd_, p_, q_, ix_, iy_, iz_;
  std::vector<std::pair<HamiltonianSpec, Spectrum>> cache_;
};

/// Frobenius distance between exp(-i(w1 Iz + 3/8 P - H_d/2) t) and the
/// factored form exp(-i w1 Iz t) exp(-i F t) at t = N pi / w1, with F
/// truncated at `order` (0 or 1).
double verify_average_hamiltonian(const SpinCluster& cluster, double omega1, long n_halfcycles,
                                  int order);

/// Effective secular correction during a + phase burst; its sign flips with w1.
CMatrix effective_correction(const SpinCluster& cluster, double omega1);

/// Per-slice factor of the time-ordered product. kExact uses the exact
/// interaction-picture transfer over each slice, so the product is independent
/// of the slice count; kMidpoint freezes the integrand at the slice midpoint
/// (second order in the slice width).
enum class SliceRule { kExact, kMidpoint };

struct SliceControl {
  int initial_slices = 200;
  SliceRule rule = SliceRule::kExact;
  double tolerance = 1e-8;
  int max_doublings = 8;
};

struct SlicedPropagator {
  Propagator propagator;
  int slices = 0;
  double last_change = 0.0;  // Frobenius change at the final doubling
  bool converged = false;
};

/// Time-ordered exponential of the interaction-picture correction over t1,
/// slices doubled until successive results agree.
SlicedPropagator effective_propagator_A3(const SpinCluster& cluster, double omega1, double t1,
                                         const SliceControl& control = {});
/// Same product with a fixed slice count.
Propagator effective_propagator_A3_fixed(const SpinCluster& cluster, double omega1, double t1,
                                         int slices, SliceRule rule = SliceRule::kExact);

/// Phase-alternated effective propagator
///   exp(-i H_d t1/2) exp(-i F_- t1/2) exp(-i F_+ t1/2),  F_+- = -H_d/2 + C_+-.
/// `correction_scale` multiplies the correction (0 gives perfect reversal).
Propagator effective_propagator_A4(const SpinCluster& cluster, double omega1, double t1,
                                   double correction_scale = 1.0);

}  // namespace dme
