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

#include "dme/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "dme/error.hpp"
#include "dme/simd/kernels.hpp"

namespace dme {

using cplx = std::complex<double>;

Spectrum Spectrum::of(const CMatrix& h) {
  if (h.rows() != h.cols()) throw InvalidArgument("non-square matrix");
  const double scale = std::max(1.0, h.norm());
  if ((h - h.adjoint()).norm() > 1e-10 * scale) throw InvalidArgument("non-Hermitian input");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

CMatrix Spectrum::propagator(double t) const {
  Eigen::VectorXcd phase(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) phase[k] = std::polar(1.0, -values[k] * t);
  return vectors * phase.asDiagonal() * vectors.adjoint();
}

CMatrix Spectrum::to_eigenbasis(const CMatrix& x) const { return vectors.adjoint() * x * vectors; }

SpectralSeries::SpectralSeries(const Eigen::VectorXd& eigenvalues, const CMatrix& weights) {
  const Eigen::Index d = eigenvalues.size();
  if (weights.rows() != d || weights.cols() != d)
    throw InvalidArgument("spectral weights do not match spectrum");
  // Terms with zero weight never contribute; dropping them keeps the SIMD
  // loops short for sparse correlation structures.
  for (Eigen::Index m = 0; m < d; ++m)
    for (Eigen::Index n = 0; n < d; ++n) {
      const cplx w = weights(m, n);
      if (w == cplx(0.0, 0.0)) continue;
      weights_.push_back(w);
      freqs_.push_back(eigenvalues[m] - eigenvalues[n]);
    }
}

std::vector<cplx> SpectralSeries::evaluate(double dt, int count) const {
  std::vector<cplx> out(static_cast<std::size_t>(std::max(count, 0)));
  const std::size_t n = weights_.size();
  if (n == 0 || count <= 0) return out;
  std::vector<cplx> phase(n), step(n);
  for (std::size_t k = 0; k < n; ++k) step[k] = std::polar(1.0, -freqs_[k] * dt);
  for (int j = 0; j < count; ++j) {
    if (j % kResyncInterval == 0) {
      const double t = j * dt;
      for (std::size_t k = 0; k < n; ++k) phase[k] = std::polar(1.0, -freqs_[k] * t);
    } else {
      simd::cmul_inplace(phase, step);
    }
    out[static_cast<std::size_t>(j)] = simd::cdot(weights_, phase);
  }
  return out;
}

cplx SpectralSeries::at(double t) const {
  cplx s(0.0, 0.0);
  for (std::size_t k = 0; k < weights_.size(); ++k) s += weights_[k] * std::polar(1.0, -freqs_[k] * t);
  return s;
}

CMatrix correlation_weights(const Spectrum& spec, const CMatrix& x, const CMatrix& o) {
  const CMatrix xe = spec.to_eigenbasis(x);
  const CMatrix oe = spec.to_eigenbasis(o);
  return xe.cwiseProduct(oe.transpose());
}

}  // namespace dme
