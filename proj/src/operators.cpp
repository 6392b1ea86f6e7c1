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

#include "dme/operators.hpp"

#include <cmath>
#include <complex>

#include "dme/error.hpp"

namespace dme {
namespace {

using cplx = std::complex<double>;

void check_sites(int n) {
  if (n < 1 || n > kMaxSites)
    throw InvalidArgument("dimension overflow: " + std::to_string(n) + " sites (limit " +
                          std::to_string(kMaxSites) + ")");
}

// Bit mask of site i in an N-site basis index.
inline Eigen::Index site_mask(int i, int n) { return Eigen::Index(1) << (n - 1 - i); }

inline double sz(Eigen::Index state, Eigen::Index mask) { return (state & mask) ? -0.5 : 0.5; }

Eigen::Index dim_of(int n) { return Eigen::Index(1) << n; }

Eigen::Matrix2cd single_rotation(Axis axis, double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  const cplx i(0.0, 1.0);
  Eigen::Matrix2cd r;
  switch (axis) {
    case Axis::kX:
      r << c, -i * s, -i * s, c;
      break;
    case Axis::kY:
      r << c, -s, s, c;
      break;
    case Axis::kZ:
      r << std::exp(-i * (angle / 2.0)), 0.0, 0.0, std::exp(i * (angle / 2.0));
      break;
  }
  return r;
}

}  // namespace

int Operator::sites() const {
  int n = 0;
  while ((Eigen::Index(1) << n) < m.rows()) ++n;
  return n;
}

bool Operator::is_hermitian(double tol) const {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() < tol * scale;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

std::string axis_name(Axis axis) {
  switch (axis) {
    case Axis::kX:
      return "x";
    case Axis::kY:
      return "y";
    case Axis::kZ:
      return "z";
  }
  return "?";
}

Operator collective(Axis axis, int n) {
  check_sites(n);
  const Eigen::Index d = dim_of(n);
  CMatrix m = CMatrix::Zero(d, d);
  for (Eigen::Index s = 0; s < d; ++s) {
    for (int i = 0; i < n; ++i) {
      const Eigen::Index mask = site_mask(i, n);
      switch (axis) {
        case Axis::kZ:
          m(s, s) += sz(s, mask);
          break;
        case Axis::kX:
          m(s ^ mask, s) += 0.5;
          break;
        case Axis::kY:
          // <up|I_y|down> = -i/2, <down|I_y|up> = +i/2
          m(s ^ mask, s) += (s & mask) ? cplx(0.0, -0.5) : cplx(0.0, 0.5);
          break;
      }
    }
  }
  return {std::move(m), "I" + axis_name(axis), true};
}

Operator secular_dipolar(const SpinCluster& cluster) {
  const int n = cluster.size();
  check_sites(n);
  const Eigen::Index d = dim_of(n);
  CMatrix m = CMatrix::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Eigen::Index mi = site_mask(i, n);
    for (int j = i + 1; j < n; ++j) {
      const double a = cluster.couplings(i, j);
      if (a == 0.0) continue;
      const Eigen::Index mj = site_mask(j, n);
      for (Eigen::Index s = 0; s < d; ++s) {
        m(s, s) += a * sz(s, mi) * sz(s, mj);
        // flip-flop: only when the two spins are antiparallel
        if (((s & mi) != 0) != ((s & mj) != 0)) m(s ^ mi ^ mj, s) += -0.25 * a;
      }
    }
  }
  return {std::move(m), "Hd", true};
}

Operator pair_raising(const SpinCluster& cluster, int i, int j) {
  const int n = cluster.size();
  check_sites(n);
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw InvalidArgument("bad site pair");
  const Eigen::Index d = dim_of(n);
  const Eigen::Index mi = site_mask(i, n), mj = site_mask(j, n);
  const double a = cluster.couplings(i, j);
  CMatrix m = CMatrix::Zero(d, d);
  for (Eigen::Index s = 0; s < d; ++s)
    if ((s & mi) && (s & mj)) m(s ^ mi ^ mj, s) += a;
  return {std::move(m), "H2[" + std::to_string(i) + "," + std::to_string(j) + "]", false};
}

DoubleQuantum nonsecular_pair_raising(const SpinCluster& cluster) {
  const int n = cluster.size();
  check_sites(n);
  const Eigen::Index d = dim_of(n);
  CMatrix up = CMatrix::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Eigen::Index mi = site_mask(i, n);
    for (int j = i + 1; j < n; ++j) {
      const double a = cluster.couplings(i, j);
      if (a == 0.0) continue;
      const Eigen::Index mj = site_mask(j, n);
      for (Eigen::Index s = 0; s < d; ++s)
        if ((s & mi) && (s & mj)) up(s ^ mi ^ mj, s) += a;
    }
  }
  CMatrix down = up.adjoint();
  CMatrix p = up + down;
  return {{std::move(up), "H2", false}, {std::move(down), "Hm2", false}, {std::move(p), "P", true}};
}

Operator operator_Q(const SpinCluster& cluster) {
  const int n = cluster.size();
  check_sites(n);
  const Eigen::Index d = dim_of(n);
  CMatrix m = CMatrix::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Eigen::Index mi = site_mask(i, n);
    for (int j = i + 1; j < n; ++j) {
      const double a = cluster.couplings(i, j);
      if (a == 0.0) continue;
      const Eigen::Index mj = site_mask(j, n);
      for (Eigen::Index s = 0; s < d; ++s) {
        // I_+ + I_- = 2 I_x flips a spin with unit amplitude
        m(s ^ mj, s) += a * sz(s, mi);
        m(s ^ mi, s) += a * sz(s, mj);
      }
    }
  }
  return {std::move(m), "Q", true};
}

Operator rotate(const Operator& op, Axis axis, double angle) {
  const int n = op.sites();
  if (op.dim() != dim_of(n) || op.m.cols() != op.dim())
    throw InvalidArgument("rotate: operator is not a 2^N square matrix");
  if (angle == 0.0) return op;
  const Eigen::Matrix2cd r = single_rotation(axis, angle);
  const Eigen::Matrix2cd rc = r.conjugate();
  CMatrix m = op.m;
  const Eigen::Index d = m.rows();
  for (int i = 0; i < n; ++i) {
    const Eigen::Index mask = site_mask(i, n);
    for (Eigen::Index s0 = 0; s0 < d; ++s0) {
      if (s0 & mask) continue;
      const Eigen::Index s1 = s0 | mask;
      // rows: R acting on the left
      for (Eigen::Index c = 0; c < d; ++c) {
        const cplx a = m(s0, c), b = m(s1, c);
        m(s0, c) = r(0, 0) * a + r(0, 1) * b;
        m(s1, c) = r(1, 0) * a + r(1, 1) * b;
      }
      // columns: R^dagger acting on the right
      for (Eigen::Index rr = 0; rr < d; ++rr) {
        const cplx a = m(rr, s0), b = m(rr, s1);
        m(rr, s0) = a * rc(0, 0) + b * rc(0, 1);
        m(rr, s1) = a * rc(1, 0) + b * rc(1, 1);
      }
    }
  }
  return {std::move(m), "R" + axis_name(axis) + "(" + op.label + ")", op.hermitian};
}

CMatrix rotation_matrix(Axis axis, double angle, int n) {
  check_sites(n);
  const Eigen::Matrix2cd r = single_rotation(axis, angle);
  CMatrix out = CMatrix::Identity(1, 1);
  for (int i = 0; i < n; ++i) {
    CMatrix next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index a = 0; a < out.rows(); ++a)
      for (Eigen::Index b = 0; b < out.cols(); ++b)
        next.block<2, 2>(2 * a, 2 * b) = out(a, b) * r;
    out = std::move(next);
  }
  return out;
}

Operator frame_transform(const Operator& op, Axis axis, double angle) {
  Operator out = rotate(op, axis, -angle);
  out.label = "F" + axis_name(axis) + "(" + op.label + ")";
  return out;
}

TiltReport tilt_decompose(const Operator& hd, double theta, const SpinCluster& cluster) {
  const DoubleQuantum dq = nonsecular_pair_raising(cluster);
  const Operator q = operator_Q(cluster);
  if (hd.dim() != dq.p.dim()) throw InvalidArgument("tilt_decompose: dimension mismatch");
  TiltReport rep;
  const double c = std::cos(theta), s = std::sin(theta);
  rep.theta = theta;
  rep.coeff_hd = 0.5 * (3.0 * c * c - 1.0);
  rep.coeff_p = 0.375 * s * s;
  rep.coeff_q = -0.75 * s * c;
  const CMatrix expected = rep.coeff_hd * hd.m + rep.coeff_p * dq.p.m + rep.coeff_q * q.m;
  rep.residual = (frame_transform(hd, Axis::kY, theta).m - expected).norm();
  rep.hd_norm = hd.m.norm();
  return rep;
}

MagnusCorrection magnus_first_correction(const SpinCluster& cluster, double omega1) {
  if (!(omega1 > 0.0)) throw InvalidArgument("omega1 must be positive");
  const DoubleQuantum dq = nonsecular_pair_raising(cluster);
  const Operator hd = secular_dipolar(cluster);
  const double k1 = 0.375 * 0.375 / (2.0 * omega1);
  const double k2 = 0.375 * 0.5 / (2.0 * omega1);
  CMatrix h1 = k1 * commutator(dq.lowering.m, dq.raising.m);
  CMatrix h2 = k2 * commutator(hd.m, dq.lowering.m - dq.raising.m);
  return {{std::move(h1), "H1(1)", true}, {std::move(h2), "H2(1)", true}};
}

CMatrix first_order_term(const MagnusCorrection& corr) { return corr.h2.m - corr.h1.m; }

}  // namespace dme
