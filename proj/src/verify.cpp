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

#include "dme/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "dme/engine.hpp"
#include "dme/experiments.hpp"
#include "dme/pulseprog.hpp"
#include "dme/simd/kernels.hpp"
#include "dme/thermo.hpp"

namespace dme {
namespace {

CheckResult below(std::string name, double value, double limit, std::string detail = {}) {
  return {std::move(name), value < limit, value, limit, std::move(detail)};
}

double max_over(int cases, std::uint64_t seed, auto&& fn) {
  double worst = 0.0;
  for (int c = 0; c < cases; ++c) worst = std::max(worst, fn(seed + static_cast<std::uint64_t>(c)));
  return worst;
}

}  // namespace

CMatrix random_hermitian(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  CMatrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = {nd(rng), nd(rng)};
  return 0.5 * (m + m.adjoint());
}

SpinCluster random_cluster(int sites, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coord(-2, 2);
  std::normal_distribution<double> nd;
  std::set<std::array<int, 3>> seen{{0, 0, 0}};
  std::vector<Eigen::Vector3d> pos{Eigen::Vector3d::Zero()};
  while (static_cast<int>(pos.size()) < sites) {
    const std::array<int, 3> p{coord(rng), coord(rng), coord(rng)};
    if (!seen.insert(p).second) continue;
    pos.emplace_back(p[0], p[1], p[2]);
  }
  Eigen::Vector3d dir(nd(rng), nd(rng), nd(rng));
  if (dir.norm() < 1e-6) dir = Eigen::Vector3d::UnitZ();
  return make_cluster(std::move(pos), Orientation::custom(dir));
}

std::vector<CheckResult> run_invariants(const VerifyOptions& options) {
  std::vector<CheckResult> out;
  const std::uint64_t seed = options.seed;
  const int cases = std::max(1, options.random_cases);

  // SIMD backends against the scalar reference.
  {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    const auto& ref = simd::scalar_kernels();
    const auto& act = simd::active();
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 64u, 1001u}) {
      std::vector<double> a(n), b(n);
      std::vector<simd::cplx> x(n), y(n);
      for (std::size_t k = 0; k < n; ++k) {
        a[k] = nd(rng);
        b[k] = nd(rng);
        x[k] = {nd(rng), nd(rng)};
        y[k] = {nd(rng), nd(rng)};
      }
      const double scale = 1.0 + static_cast<double>(n);
      worst = std::max(worst, std::abs(ref.dot(a.data(), b.data(), n) - act.dot(a.data(), b.data(), n)) / scale);
      worst = std::max(worst, std::abs(ref.cdot(x.data(), y.data(), n) - act.cdot(x.data(), y.data(), n)) / scale);
      worst = std::max(worst, std::abs(ref.norm2(x.data(), n) - act.norm2(x.data(), n)) / scale);
      auto x1 = x, x2 = x;
      ref.cmul_inplace(x1.data(), y.data(), n);
      act.cmul_inplace(x2.data(), y.data(), n);
      for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(x1[k] - x2[k]));
    }
    out.push_back(below(std::string("simd equivalence (") + act.name + " vs scalar)", worst, 1e-12));
  }

  // expm: unitarity and group property.
  {
    const double worst = max_over(cases, seed, [](std::uint64_t s) {
      const Eigen::Index dim = 4 << (s % 5);  // 4..64
      const Operator h{random_hermitian(dim, s), "H", true};
      const Propagator a = expm(h, 0.37), b = expm(h, 0.21), ab = expm(h, 0.58);
      return std::max(a.unitarity_error() / static_cast<double>(dim),
                      (a.matrix * b.matrix - ab.matrix).norm());
    });
    out.push_back(below("expm unitarity and group property", worst, 1e-9));
  }

  // Operator identities.
  {
    double comm = 0.0, tilt = 0.0;
    std::mt19937_64 rng(seed + 101);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    for (int c = 0; c < cases; ++c) {
      const SpinCluster cl = random_cluster(2 + c % 5, seed + 1000 + static_cast<std::uint64_t>(c));
      const int n = cl.size();
      const CMatrix hd = secular_dipolar(cl).m;
      const DoubleQuantum dq = nonsecular_pair_raising(cl);
      const CMatrix q = operator_Q(cl).m;
      const CMatrix iz = collective(Axis::kZ, n).m;
      const double s = std::max(1.0, hd.norm());
      comm = std::max(comm, commutator(hd, iz).norm() / s);
      comm = std::max(comm, (commutator(iz, dq.raising.m) - 2.0 * dq.raising.m).norm() / s);
      comm = std::max(comm, (commutator(iz, commutator(iz, q)) - q).norm() / s);
      const TiltReport rep = tilt_decompose(secular_dipolar(cl), angle(rng), cl);
      tilt = std::max(tilt, rep.residual / std::max(rep.hd_norm, 1e-300));
    }
    out.push_back(below("dipolar commutator identities", comm, 1e-10));
    out.push_back(below("tilt decomposition residual / ||Hd||", tilt, 1e-10));
  }

  // Ideal reversal and evolve invariants.
  {
    const SpinCluster cl = build_cluster(Orientation::along(OrientationLabel::k100), 2.0, 5);
    Engine eng(cl);
    const double tau = 3.0 / local_field(cl);
    PropagationPlan plan;
    plan.init = InitKind::kIx;
    plan.segments = {seg::EvolveUnder{{HamiltonianKind::kIdealReversal, 1, 0.0}, 2 * tau, {}},
                     seg::EvolveUnder{{HamiltonianKind::kSecular, 1, 0.0}, tau, {}}};
    const DeviationState s0 = eng.initial_state(InitKind::kIx, FrameKind::kRotating);
    const auto r = eng.evolve(s0, plan);
    out.push_back(below("ideal reversal composes to identity", (r.state.delta - s0.delta).norm(), 1e-9));

    PropagationPlan mixed;
    mixed.init = InitKind::kDipolar;
    mixed.frame = FrameKind::kTilted;
    const double w1 = 10.0 * local_field(cl);
    for (int k = 0; k < 10; ++k) {
      if (k % 3 == 0) mixed.segments.push_back(seg::InstantRotation{Axis::kY, 0.3 + k});
      else
        mixed.segments.push_back(seg::EvolveUnder{{HamiltonianKind::kTiltedBurst, k % 2 ? 1 : -1, w1},
                                                  0.7 / local_field(cl), {}});
    }
    const DeviationState d0 = eng.initial_state(InitKind::kDipolar, FrameKind::kTilted);
    const auto rm = eng.evolve(d0, mixed);
    Eigen::SelfAdjointEigenSolver<CMatrix> e0(d0.delta), e1(rm.state.delta);
    const double scale = std::max(1.0, d0.delta.norm());
    double worst = std::abs((rm.state.delta.trace() - d0.delta.trace())) / scale;
    worst = std::max(worst, std::abs(rm.state.delta.squaredNorm() - d0.delta.squaredNorm()) / (scale * scale));
    worst = std::max(worst, (e0.eigenvalues() - e1.eigenvalues()).cwiseAbs().maxCoeff() / scale);
    out.push_back(below("evolve preserves trace, norm and spectrum", worst, 1e-9));
  }

  // FID normalisation and second moment.
  {
    const SpinCluster cl = build_cluster(Orientation::along(OrientationLabel::k110), 2.0, 6);
    const double m2 = second_moment(cl);
    const double h = 1e-3 / std::sqrt(m2);
    const SignalCurve g = fid(cl, 2 * h, h);
    const double g2 = (g.values[1] - g.values[0]) * 2.0 / (h * h);  // even function
    out.push_back(below("FID G(0) = 1", std::abs(g.values[0] - 1.0), 1e-12));
    out.push_back(below("-G''(0) = M2 (relative)", std::abs(-g2 - m2) / m2, 1e-3));
  }

  // Thermo constant-kernel oracle.
  {
    const double g = 1.0;
    const double t_end = 4.0 * std::numbers::pi;
    const BetaTrajectory tr = solve_beta(KernelSpec::constant(g, t_end + 1.0), t_end, 0.01);
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k)
      worst = std::max(worst, std::abs(tr.beta[k] - std::cos(std::sqrt(g) * tr.times[k])));
    out.push_back(below("constant-kernel cosine oracle", worst, 1e-6));
  }

  // Pulse-program round trip.
  {
    bool ok = true;
    for (const PulseProgram& p :
         {builtin_seq1(25.3, 40, 60, 0.5), builtin_seq2(12.5, 8, 60, 0.5), builtin_rpw(52.6, 6, 60, 0.5)}) {
      const std::string once = print_program(p);
      ok = ok && print_program(parse_program(once)) == once;
    }
    out.push_back({"parse(print(p)) is stable", ok, ok ? 0.0 : 1.0, 0.5, {}});
  }
  return out;
}

}  // namespace dme
