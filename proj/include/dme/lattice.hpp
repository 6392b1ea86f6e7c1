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

// Finite CaF2-like 19F clusters: the fluorine sublattice is simple cubic with
// spacing equal to half the CaF2 cubic cell; calcium carries no spin.
// All energies are angular frequencies (rad/s), hbar = 1.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace dme {

struct PhysicalConstants {
  /// 19F gyromagnetic ratio, rad s^-1 G^-1.
  double gamma = 2.5166e4;
  /// Nearest-neighbour 19F spacing in metres (a/2 for a = 5.463 A).
  double lattice_constant = 2.7315e-10;
  /// D in a_ij = D (1 - 3 cos^2 theta) / r^3, rad s^-1 m^3. The default is
  /// calibrated so that the converged [100] lattice second moment equals
  /// 2.55e10 s^-2 (see kCalibrationRadius).
  double dipolar_prefactor = kCalibratedPrefactor;

  static constexpr double kCalibratedPrefactor = 1.1873684968639814e-24;
  static constexpr double kTargetM2_100 = 2.55e10;
  static constexpr double kCalibrationRadius = 12.0;
  /// mu0/(4 pi) gamma^2 hbar for 19F in SI units; reported for comparison only.
  static constexpr double kNaturalPrefactor = 6.6788e-25;

  void validate() const;
};

enum class OrientationLabel { k100, k110, k111, kCustom };

struct Orientation {
  Eigen::Vector3d direction;  // unit vector, crystal axes
  OrientationLabel label = OrientationLabel::kCustom;

  /// Normalises `dir`; throws on a zero vector.
  static Orientation custom(const Eigen::Vector3d& dir);
  static Orientation along(OrientationLabel label);
  /// Accepts "100", "110", "111", "[100]"..., or "x,y,z".
  static Orientation parse(const std::string& text);

  std::string name() const;
};

struct SpinCluster {
  std::vector<Eigen::Vector3d> positions;  // units of lattice_constant
  Orientation orientation;
  Eigen::MatrixXd couplings;  // a_ij, rad/s, symmetric, zero diagonal
  PhysicalConstants constants;

  int size() const { return static_cast<int>(positions.size()); }
};

/// Secular dipolar coefficient for a separation `r` in metres.
double coupling(const Eigen::Vector3d& r, const Eigen::Vector3d& field_dir,
                const PhysicalConstants& constants);

/// Cluster from explicit positions (lattice units); couplings computed.
SpinCluster make_cluster(std::vector<Eigen::Vector3d> positions, const Orientation& orientation,
                         const PhysicalConstants& constants = {});

/// Simple-cubic sites within `radius` of the origin, sorted by distance with
/// a lexicographic tie-break on integer coordinates, truncated to `max_sites`.
SpinCluster build_cluster(const Orientation& orientation, double radius, int max_sites,
                          const PhysicalConstants& constants = {});

/// Van Vleck like-spin second moment of a cluster:
/// (3/4) I(I+1) (1/N) sum_{j != k} a_jk^2 with I = 1/2.
double second_moment(const SpinCluster& cluster);

/// sqrt(M2 / 3).
double local_field(const SpinCluster& cluster);

/// sqrt(Tr(H_d^2) / Tr(I_z^2)) evaluated from the operator itself.
double local_field_trace(const SpinCluster& cluster, const Eigen::MatrixXcd& hd);

/// Infinite-lattice Van Vleck second moment truncated at `radius`:
/// (9/16) sum over sites k != 0 within radius of a_0k^2.
double lattice_second_moment(const Orientation& orientation, double radius,
                             const PhysicalConstants& constants = {});

/// Prefactor D for which lattice_second_moment([100], radius) == target_m2.
double calibrate_prefactor(double radius, double target_m2, PhysicalConstants constants = {});

/// Copy of `cluster` with every coupling multiplied by `factor`.
SpinCluster scaled(const SpinCluster& cluster, double factor);

/// FNV-1a digest of the coupling table, hex encoded.
std::string cluster_hash(const SpinCluster& cluster);

}  // namespace dme
