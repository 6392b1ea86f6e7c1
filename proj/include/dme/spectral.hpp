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

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "dme/operators.hpp"

namespace dme {

/// Eigendecomposition of a Hermitian matrix, H = V diag(values) V^dagger.
struct Spectrum {
  Eigen::VectorXd values;
  CMatrix vectors;

  /// Throws InvalidArgument if `h` is not Hermitian to 1e-10 relative.
  static Spectrum of(const CMatrix& h);

  /// exp(-i H t).
  CMatrix propagator(double t) const;
  /// V^dagger X V
  CMatrix to_eigenbasis(const CMatrix& x) const;
};

/// Evaluates S(t) = sum_mn W_mn exp(-i (l_m - l_n) t) on the uniform grid
/// t_k = k * dt, k = 0..count-1. Phases are advanced by complex
/// multiplication and resynchronised exactly every kResyncInterval samples.
class SpectralSeries {
 public:
  static constexpr int kResyncInterval = 64;

  SpectralSeries(const Eigen::VectorXd& eigenvalues, const CMatrix& weights);

  std::vector<std::complex<double>> evaluate(double dt, int count) const;
  /// Single point, exact phases.
  std::complex<double> at(double t) const;

 private:
  std::vector<std::complex<double>> weights_;
  std::vector<double> freqs_;
};

/// Weights for Tr(U X U^dagger O) with U = exp(-i H t), given H's spectrum:
/// W_mn = X'_mn O'_nm in the eigenbasis.
CMatrix correlation_weights(const Spectrum& spec, const CMatrix& x, const CMatrix& o);

}  // namespace dme
