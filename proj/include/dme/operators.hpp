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

// Spin-operator algebra on the 2^N product basis. Site 0 is the most
// significant bit of a basis index and bit value 0 is spin up (I_z = +1/2).

#include <Eigen/Dense>
#include <string>

#include "dme/lattice.hpp"

namespace dme {

using CMatrix = Eigen::MatrixXcd;

/// Largest cluster the dense builders accept (4096 x 4096 matrices).
inline constexpr int kMaxSites = 12;

enum class Axis { kX, kY, kZ };

struct Operator {
  CMatrix m;
  std::string label;
  bool hermitian = true;

  Eigen::Index dim() const { return m.rows(); }
  int sites() const;
  double norm() const { return m.norm(); }
  /// max |M - M^dagger| < tol * max(1, ||M||_F)
  bool is_hermitian(double tol = 1e-12) const;
};

CMatrix commutator(const CMatrix& a, const CMatrix& b);

/// Collective spin component sum_i I_axis,i.
Operator collective(Axis axis, int n_sites);

/// Secular dipolar Hamiltonian
/// sum_{i<j} a_ij [I_zi I_zj - (I_+i I_-j + I_-i I_+j) / 4].
Operator secular_dipolar(const SpinCluster& cluster);

struct DoubleQuantum {
  Operator raising;   // H^(2) = sum_{i<j} a_ij I_+i I_+j
  Operator lowering;  // H^(-2) = (H^(2))^dagger
  Operator p;         // P = H^(2) + H^(-2)
};
DoubleQuantum nonsecular_pair_raising(const SpinCluster& cluster);

/// a_ij I_+i I_+j for a single pair.
Operator pair_raising(const SpinCluster& cluster, int i, int j);

/// Single-quantum operator
/// Q = sum_{i<j} a_ij [I_zi (I_+j + I_-j) + I_zj (I_+i + I_-i)].
Operator operator_Q(const SpinCluster& cluster);

/// R op R^dagger with R = exp(-i angle I_axis). Applied site by site.
Operator rotate(const Operator& op, Axis axis, double angle);

/// Dense exp(-i angle I_axis) built as a tensor product of 2x2 rotations.
CMatrix rotation_matrix(Axis axis, double angle, int n_sites);

/// Operator seen from a frame reached by the unitary exp(-i angle I_axis):
/// R^dagger op R, i.e. rotate(op, axis, -angle). This is the convention of
/// the tilted rotating frame.
Operator frame_transform(const Operator& op, Axis axis, double angle);

struct TiltReport {
  double theta = 0.0;
  double coeff_hd = 0.0;  // (3 cos^2 - 1) / 2
  double coeff_p = 0.0;   // (3/8) sin^2
  double coeff_q = 0.0;   // -(3/4) sin cos
  double residual = 0.0;  // Frobenius norm of the difference
  double hd_norm = 0.0;
};

/// Checks frame_transform(H_d, y, theta) against
/// (3cos^2-1)/2 H_d + (3/8) sin^2 P - (3/4) sin cos Q.
TiltReport tilt_decompose(const Operator& hd, double theta, const SpinCluster& cluster);

struct MagnusCorrection {
  Operator h1;  // (3/8)^2 [H^(-2), H^(2)] / (2 w1)
  Operator h2;  // (3/8)(1/2) [H_d, H^(-2) - H^(2)] / (2 w1)
};

/// First-order average-Hamiltonian operators with the commutator ordering
/// written in the classic magic-echo literature. Note that in
/// exp(-i w1 I_z t) exp(-i F t) the first-order term is F1 = -h1 + h2; see
/// first_order_term().
MagnusCorrection magnus_first_correction(const SpinCluster& cluster, double omega1);

/// F1 such that exp(-i(w1 I_z + 3/8 P - H_d/2) t) ~ exp(-i w1 I_z t)
/// exp(-i (-H_d/2 + F1) t) at t = N pi / w1.
CMatrix first_order_term(const MagnusCorrection& corr);

std::string axis_name(Axis axis);

}  // namespace dme
