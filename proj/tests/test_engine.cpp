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

#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "dme/engine.hpp"
#include "dme/error.hpp"
#include "dme/experiments.hpp"
#include "dme/verify.hpp"

using namespace dme;
using cplx = std::complex<double>;

namespace {

SpinCluster cluster(int n, OrientationLabel o = OrientationLabel::k100) {
  return build_cluster(Orientation::along(o), 2.0, n);
}

}  // namespace

TEST_CASE("expm basics") {
  const Operator iz = collective(Axis::kZ, 1);
  CHECK((expm(iz, 0.0).matrix - CMatrix::Identity(2, 2)).norm() == 0.0);
  const double w = 3.0;
  const Operator h{w * iz.m, "wIz", true};
  const CMatrix u = expm(h, std::numbers::pi / w).matrix;
  CHECK(std::abs(u(0, 0) - std::exp(cplx(0, -std::numbers::pi / 2))) < 1e-14);
  CHECK(std::abs(u(1, 1) - std::exp(cplx(0, std::numbers::pi / 2))) < 1e-14);
  CHECK(std::abs(u(0, 1)) < 1e-15);
  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(expm(Operator{bad, "bad", false}, 1.0), InvalidArgument);
}

TEST_CASE("expm group property and unitarity on random Hermitian matrices") {
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index dim = 4 + (k * 7) % 61;
    const Operator h{random_hermitian(dim, 1000 + k), "H", true};
    const Propagator a = expm(h, 0.41), b = expm(h, 0.17), ab = expm(h, 0.58);
    CHECK(a.unitarity_error() < 1e-9 * static_cast<double>(dim));
    CHECK((a.matrix * b.matrix - ab.matrix).norm() < 1e-10 * static_cast<double>(dim));
  }
}

TEST_CASE("initial states") {
  Engine eng(cluster(4));
  const DeviationState tilted = eng.initial_state(InitKind::kDipolar, FrameKind::kTilted);
  CHECK((tilted.delta - (0.375 * eng.p().m - 0.5 * eng.hd().m)).norm() < 1e-14);
  CHECK(tilted.components.size() == 2);
  const DeviationState plain = eng.initial_state(InitKind::kDipolar, FrameKind::kRotating);
  CHECK((plain.delta - eng.hd().m).norm() == 0.0);
  // seq2 is the 45 degree frame transform of dipolar order
  const DeviationState s2 = eng.initial_state(InitKind::kSeq2, FrameKind::kRotating);
  CHECK((s2.delta - frame_transform(eng.hd(), Axis::kY, std::numbers::pi / 4).m).norm() < 1e-12 * eng.hd().norm());
  for (const auto* s : {&tilted, &plain, &s2}) {
    CHECK(s->trace_error() < 1e-10);
    CHECK(s->hermiticity_error() < 1e-10);
  }
}

TEST_CASE("evolve: empty plan and dimension checks") {
  Engine eng(cluster(3));
  const DeviationState s = eng.initial_state(InitKind::kIx, FrameKind::kRotating);
  const auto r = eng.evolve(s, PropagationPlan{});
  CHECK((r.state.delta - s.delta).norm() == 0.0);
  CHECK(r.signals.empty());
  DeviationState wrong;
  wrong.delta = CMatrix::Zero(4, 4);
  CHECK_THROWS_WITH_AS(eng.evolve(wrong, PropagationPlan{}), doctest::Contains("dimension mismatch"), InvalidArgument);
}

TEST_CASE("free evolution of I_x reproduces the FID") {
  const SpinCluster cl = cluster(5, OrientationLabel::k110);
  Engine eng(cl);
  const double step = 0.02 / local_field(cl), window = 200 * step;
  PropagationPlan plan;
  plan.init = InitKind::kIx;
  plan.segments = {seg::AcquireWindow{Axis::kX, window, step}};
  const auto r = eng.evolve(eng.initial_state(InitKind::kIx, FrameKind::kRotating), plan);
  const SignalCurve g = fid(cl, window, step);
  REQUIRE(r.signals.size() == 1);
  REQUIRE(r.signals[0].total.size() == g.values.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < g.values.size(); ++k) worst = std::max(worst, std::abs(r.signals[0].total[k] - g.values[k]));
  CHECK(worst < 1e-12);
  // Delay followed by a one-point acquisition lands on the same curve
  PropagationPlan delayed;
  delayed.segments = {seg::EvolveUnder{{HamiltonianKind::kSecular, 1, 0.0}, 37 * step, {}},
                      seg::AcquireWindow{Axis::kX, step, step}};
  const auto d = eng.evolve(eng.initial_state(InitKind::kIx, FrameKind::kRotating), delayed);
  CHECK(std::abs(d.signals[0].total[0] - g.values[37]) < 1e-12);
  CHECK(d.signals[0].start == doctest::Approx(37 * step));
}

TEST_CASE("ideal time reversal composes to the identity") {
  const SpinCluster cl = cluster(6);
  Engine eng(cl);
  const double tau = 4.0 / local_field(cl);
  PropagationPlan plan;
  plan.segments = {seg::EvolveUnder{{HamiltonianKind::kSecular, 1, 0.0}, tau, {}},
                   seg::EvolveUnder{{HamiltonianKind::kIdealReversal, 1, 0.0}, 2 * tau, {}}};
  const DeviationState s = eng.initial_state(InitKind::kIx, FrameKind::kRotating);
  CHECK((eng.evolve(s, plan).state.delta - s.delta).norm() < 1e-9);
}

TEST_CASE("evolve preserves unitary invariants") {
  const SpinCluster cl = cluster(5, OrientationLabel::k111);
  Engine eng(cl);
  const double wl = local_field(cl);
  PropagationPlan plan;
  for (int k = 0; k < 10; ++k) {
    if (k % 4 == 1) plan.segments.push_back(seg::InstantRotation{k % 3 == 0 ? Axis::kX : Axis::kY, 0.4 * k});
    else plan.segments.push_back(seg::EvolveUnder{{HamiltonianKind::kTiltedBurst, k % 2 ? 1 : -1, 7 * wl}, 0.9 / wl, {}});
  }
  const DeviationState s = eng.initial_state(InitKind::kSeq2, FrameKind::kRotating);
  const DeviationState f = eng.evolve(s, plan).state;
  const double scale = s.delta.norm();
  CHECK(std::abs(f.delta.trace()) < 1e-9 * scale);
  CHECK(std::abs(f.delta.squaredNorm() - s.delta.squaredNorm()) < 1e-9 * scale * scale);
  Eigen::SelfAdjointEigenSolver<CMatrix> e0(s.delta), e1(f.delta);
  CHECK((e0.eigenvalues() - e1.eigenvalues()).cwiseAbs().maxCoeff() < 1e-9 * scale);
  CHECK(f.hermiticity_error() < 1e-9 * scale);
  // components still sum to delta
  CMatrix sum = CMatrix::Zero(f.dim(), f.dim());
  for (const auto& c : f.components) sum += c.second;
  CHECK((sum - f.delta).norm() < 1e-10 * scale);
}

TEST_CASE("average Hamiltonian verification") {
  SUBCASE("zero couplings factor exactly") {
    const SpinCluster zero = scaled(cluster(4), 0.0);
    CHECK(verify_average_hamiltonian(zero, 1e5, 6, 0) < 1e-12);
    CHECK(verify_average_hamiltonian(zero, 1e5, 6, 1) < 1e-12);
  }
  for (int n = 4; n <= 6; ++n) {
    const SpinCluster cl = cluster(n);
    const double wl = local_field(cl);
    const double t1 = 4.0 / wl;
    auto err = [&](double w1, int order) {
      const long hc = std::lround(t1 * w1 / std::numbers::pi);
      return verify_average_hamiltonian(cl, w1, hc, order);
    };
    // fixed t1: pick w1 so that t1 is an exact number of half cycles at both w1 and 2 w1
    const double w1 = 10.0 * wl;
    const long hc = std::max(1L, std::lround(t1 * w1 / std::numbers::pi));
    const double e0 = verify_average_hamiltonian(cl, w1, hc, 0);
    const double e0d = verify_average_hamiltonian(cl, 2 * w1, 2 * hc, 0);
    const double e1 = verify_average_hamiltonian(cl, w1, hc, 1);
    CAPTURE(n);
    CHECK(e1 < e0);
    CHECK(e0d / e0 >= 0.2);
    CHECK(e0d / e0 <= 0.7);
    CHECK(err(40 * wl, 0) < err(20 * wl, 0));
  }
  CHECK_THROWS(verify_average_hamiltonian(cluster(3), 1e5, 0, 0));
}

TEST_CASE("A3: slice convergence, trivial limit and agreement with exact evolution") {
  const SpinCluster zero = scaled(cluster(4), 0.0);
  CHECK((effective_propagator_A3(zero, 1e5, 1e-4).propagator.matrix - CMatrix::Identity(16, 16)).norm() < 1e-12);

  const SpinCluster cl = cluster(4);
  const double wl = local_field(cl), w1 = 10 * wl;
  const long hc = 20;
  const double t1 = hc * std::numbers::pi / w1;
  const Propagator p200 = effective_propagator_A3_fixed(cl, w1, t1, 200);
  const Propagator p400 = effective_propagator_A3_fixed(cl, w1, t1, 400);
  CHECK((p200.matrix - p400.matrix).norm() < 1e-8);
  CHECK(p200.unitarity_error() < 1e-10);
  // midpoint slicing approaches the exact product at second order
  const double m200 = (effective_propagator_A3_fixed(cl, w1, t1, 200, SliceRule::kMidpoint).matrix - p400.matrix).norm();
  const double m400 = (effective_propagator_A3_fixed(cl, w1, t1, 400, SliceRule::kMidpoint).matrix - p400.matrix).norm();
  CHECK(m200 < 1e-4);
  CHECK(m200 / m400 == doctest::Approx(4.0).epsilon(0.02));
  SliceControl mid;
  mid.rule = SliceRule::kMidpoint;
  const SlicedPropagator auto_mid = effective_propagator_A3(cl, w1, t1, mid);
  CHECK(auto_mid.converged);
  CHECK((auto_mid.propagator.matrix - p400.matrix).norm() < 1e-7);
  const SlicedPropagator auto_a3 = effective_propagator_A3(cl, w1, t1);
  CHECK(auto_a3.converged);

  // + burst for t1 then free evolution t1/2, applied to P, against A3 P A3^dagger
  auto discrepancy = [&](double w) {
    const long n = std::lround(t1 * w / std::numbers::pi);
    const double t = n * std::numbers::pi / w;
    Engine eng(cl);
    PropagationPlan plan;
    plan.segments = {seg::EvolveUnder{{HamiltonianKind::kTiltedBurst, 1, w}, t, n},
                     seg::EvolveUnder{{HamiltonianKind::kSecular, 1, 0.0}, t / 2, {}}};
    DeviationState s;
    s.delta = eng.p().m;
    const CMatrix exact = eng.evolve(s, plan).state.delta;
    const CMatrix a3 = effective_propagator_A3(cl, w, t).propagator.matrix;
    return (exact - a3 * eng.p().m * a3.adjoint()).norm() / eng.p().norm();
  };
  const double d10 = discrepancy(10 * wl), d20 = discrepancy(20 * wl), d40 = discrepancy(40 * wl);
  CHECK(d20 < d10);
  CHECK(d40 < d20);
}

TEST_CASE("A4: perfect reversal limits and first-order growth") {
  const SpinCluster zero = scaled(cluster(4), 0.0);
  CHECK((effective_propagator_A4(zero, 1e5, 1e-4).matrix - CMatrix::Identity(16, 16)).norm() < 1e-12);

  const SpinCluster cl = cluster(5);
  const double wl = local_field(cl), w1 = 10 * wl, t1 = 0.3 / wl;
  const CMatrix id = CMatrix::Identity(32, 32);
  CHECK((effective_propagator_A4(cl, w1, t1, 0.0).matrix - id).norm() < 1e-12);

  // ||A4 - 1|| ~ (t1^2 / 8) ||[Hd, C]|| for small t1
  const CMatrix hd = secular_dipolar(cl).m;
  for (double scale : {0.5, 1.0}) {
    const double predicted = t1 * t1 / 8.0 * commutator(hd, scale * effective_correction(cl, w1)).norm();
    const double got = (effective_propagator_A4(cl, w1, t1, scale).matrix - id).norm();
    CAPTURE(scale);
    CHECK(got == doctest::Approx(predicted).epsilon(0.2));
  }
  const double small = (effective_propagator_A4(cl, w1, t1, 0.5).matrix - id).norm();
  const double large = (effective_propagator_A4(cl, w1, t1, 1.0).matrix - id).norm();
  CHECK(large / small == doctest::Approx(2.0).epsilon(0.05));
}
