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

#include "dme/engine.hpp"

#include <cmath>
#include <numbers>

#include "dme/error.hpp"

namespace dme {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void conjugate_all(DeviationState& s, const CMatrix& u) {
  const CMatrix ud = u.adjoint();
  s.delta = u * s.delta * ud;
  for (auto& [name, m] : s.components) m = u * m * ud;
}

std::vector<double> sample(const Spectrum& spec, const CMatrix& x, const CMatrix& o, double norm,
                           double step, int count) {
  SpectralSeries series(spec.values, correlation_weights(spec, x, o));
  const auto raw = series.evaluate(step, count);
  std::vector<double> out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) out[k] = raw[k].real() / norm;
  return out;
}

}  // namespace

double DeviationState::trace_error() const { return std::abs(delta.trace()); }

double DeviationState::hermiticity_error() const {
  return (delta - delta.adjoint()).cwiseAbs().maxCoeff();
}

double Propagator::unitarity_error() const {
  const auto n = matrix.rows();
  return (matrix * matrix.adjoint() - CMatrix::Identity(n, n)).norm();
}

Propagator expm(const Operator& h, double t) {
  if (t == 0.0) return {CMatrix::Identity(h.dim(), h.dim()), h.label, 0.0};
  return {Spectrum::of(h.m).propagator(t), h.label, t};
}

Engine::Engine(SpinCluster cluster) : cluster_(std::move(cluster)) {
  const int n = cluster_.size();
  hd_ = secular_dipolar(cluster_);
  p_ = nonsecular_pair_raising(cluster_).p;
  q_ = operator_Q(cluster_);
  ix_ = collective(Axis::kX, n);
  iy_ = collective(Axis::kY, n);
  iz_ = collective(Axis::kZ, n);
}

const Operator& Engine::spin(Axis axis) const {
  switch (axis) {
    case Axis::kX:
      return ix_;
    case Axis::kY:
      return iy_;
    case Axis::kZ:
      break;
  }
  return iz_;
}

CMatrix Engine::hamiltonian(const HamiltonianSpec& spec) const {
  switch (spec.kind) {
    case HamiltonianKind::kSecular:
      return hd_.m;
    case HamiltonianKind::kIdealReversal:
      return -0.5 * hd_.m;
    case HamiltonianKind::kTiltedBurst:
      return static_cast<double>(spec.sign) * spec.omega1 * iz_.m + 0.375 * p_.m - 0.5 * hd_.m;
  }
  throw InvalidArgument("unknown Hamiltonian kind");
}

const Spectrum& Engine::spectrum(const HamiltonianSpec& spec) {
  for (const auto& [key, s] : cache_)
    if (key == spec) return s;
  cache_.emplace_back(spec, Spectrum::of(hamiltonian(spec)));
  return cache_.back().second;
}

DeviationState Engine::initial_state(InitKind kind, FrameKind frame) const {
  DeviationState s;
  switch (kind) {
    case InitKind::kDipolar:
      if (frame == FrameKind::kTilted) {
        s.components = {{"P", 0.375 * p_.m}, {"Hd", -0.5 * hd_.m}};
      } else {
        s.components = {{"Hd", hd_.m}};
      }
      break;
    case InitKind::kIx:
      s.components = {{"Ix", ix_.m}};
      break;
    case InitKind::kSeq2:
      s.components = {{"Hd", 0.25 * hd_.m}, {"P", 0.1875 * p_.m}, {"Q", -0.375 * q_.m}};
      break;
  }
  s.delta = CMatrix::Zero(hd_.dim(), hd_.dim());
  for (const auto& c : s.components) s.delta += c.second;
  return s;
}

EvolutionResult Engine::evolve(DeviationState state, const PropagationPlan& plan) {
  if (state.dim() != hd_.dim())
    throw InvalidArgument("evolve: dimension mismatch (state " + std::to_string(state.dim()) +
                          ", cluster " + std::to_string(hd_.dim()) + ")");
  for (const auto& c : state.components)
    if (c.second.rows() != hd_.dim()) throw InvalidArgument("evolve: dimension mismatch in component");
  EvolutionResult result;
  double clock = 0.0;
  const HamiltonianSpec free{HamiltonianKind::kSecular, 1, 0.0};
  for (const Segment& s : plan.segments) {
    std::visit(overloaded{
                   [&](const seg::InstantRotation& r) {
                     conjugate_all(state, rotation_matrix(r.axis, r.angle, sites()));
                   },
                   [&](const seg::EvolveUnder& e) {
                     conjugate_all(state, spectrum(e.hamiltonian).propagator(e.duration));
                     clock += e.duration;
                   },
                   [&](const seg::AcquireWindow& a) {
                     if (!(a.step > 0.0) || !(a.window > 0.0))
                       throw InvalidArgument("acquisition window and step must be positive");
                     const int count = static_cast<int>(std::floor(a.window / a.step + 1e-9)) + 1;
                     const Spectrum& spec = spectrum(free);
                     const CMatrix& o = spin(a.observable).m;
                     const double norm = state.beta_scale * (o * o).trace().real();
                     AcquiredSignal sig;
                     sig.observable = a.observable;
                     sig.start = clock;
                     sig.times.resize(count);
                     for (int k = 0; k < count; ++k) sig.times[k] = k * a.step;
                     sig.total = sample(spec, state.delta, o, norm, a.step, count);
                     for (const auto& [name, m] : state.components)
                       sig.components.emplace_back(name, sample(spec, m, o, norm, a.step, count));
                     result.signals.push_back(std::move(sig));
                     conjugate_all(state, spec.propagator(a.window));
                     clock += a.window;
                   },
               },
               s);
  }
  result.state = std::move(state);
  return result;
}

double verify_average_hamiltonian(const SpinCluster& cluster, double omega1, long n_halfcycles,
                                  int order) {
  if (n_halfcycles < 1) throw InvalidArgument("N_halfcycles must be >= 1");
  if (order != 0 && order != 1) throw InvalidArgument("order must be 0 or 1");
  const int n = cluster.size();
  const Operator hd = secular_dipolar(cluster);
  const Operator p = nonsecular_pair_raising(cluster).p;
  const Operator iz = collective(Axis::kZ, n);
  const double t = static_cast<double>(n_halfcycles) * std::numbers::pi / omega1;
  const CMatrix exact = Spectrum::of(omega1 * iz.m + 0.375 * p.m - 0.5 * hd.m).propagator(t);
  CMatrix f = -0.5 * hd.m;
  if (order == 1) f += first_order_term(magnus_first_correction(cluster, omega1));
  // I_z is diagonal: exp(-i w1 Iz t) is a phase per basis state.
  CMatrix factored = Spectrum::of(f).propagator(t);
  for (Eigen::Index r = 0; r < factored.rows(); ++r)
    factored.row(r) *= std::exp(std::complex<double>(0.0, -omega1 * t * iz.m(r, r).real()));
  return (exact - factored).norm();
}

CMatrix effective_correction(const SpinCluster& cluster, double omega1) {
  return -magnus_first_correction(cluster, omega1).h1.m;
}

Propagator effective_propagator_A3_fixed(const SpinCluster& cluster, double omega1, double t1,
                                         int slices, SliceRule rule) {
  if (!(t1 > 0.0)) throw InvalidArgument("t1 must be positive");
  if (slices < 1) throw InvalidArgument("slice count must be positive");
  const CMatrix hd = secular_dipolar(cluster).m;
  const CMatrix c = effective_correction(cluster, omega1);
  const Spectrum free = Spectrum::of(hd);
  const double dt = t1 / slices;
  if (rule == SliceRule::kExact) {
    // Slice [a, b]: W(b) exp(-i (C - H_d/2) dt) W(a)^dagger with W(s) = exp(-i H_d s / 2);
    // the inner W factors of adjacent slices cancel.
    const CMatrix e = Spectrum::of(c - 0.5 * hd).propagator(dt);
    CMatrix u = CMatrix::Identity(hd.rows(), hd.cols());
    for (int k = 0; k < slices; ++k) u = e * u;
    u = free.propagator(0.5 * t1) * u;
    return {std::move(u), "A3", t1};
  }
  // Slice k: W_k exp(-i dt C) W_k^dagger at the midpoint s_k. Adjacent slices
  // chain through W_k^dagger W_{k-1} = exp(i H_d dt / 2).
  const CMatrix e = Spectrum::of(c).propagator(dt);
  const CMatrix step_back = free.propagator(-0.5 * dt);
  CMatrix u = free.propagator(0.5 * 0.5 * dt).adjoint();  // W_0^dagger
  u = e * u;
  for (int k = 1; k < slices; ++k) u = e * (step_back * u);
  u = free.propagator(0.5 * (slices - 0.5) * dt) * u;  // W_{n-1}
  return {std::move(u), "A3", t1};
}

SlicedPropagator effective_propagator_A3(const SpinCluster& cluster, double omega1, double t1,
                                         const SliceControl& control) {
  SlicedPropagator out;
  int slices = control.initial_slices;
  Propagator prev = effective_propagator_A3_fixed(cluster, omega1, t1, slices, control.rule);
  for (int d = 0; d < control.max_doublings; ++d) {
    slices *= 2;
    Propagator next = effective_propagator_A3_fixed(cluster, omega1, t1, slices, control.rule);
    out.last_change = (next.matrix - prev.matrix).norm();
    prev = std::move(next);
    if (out.last_change < control.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.propagator = std::move(prev);
  out.slices = slices;
  return out;
}

Propagator effective_propagator_A4(const SpinCluster& cluster, double omega1, double t1,
                                   double correction_scale) {
  if (!(t1 > 0.0)) throw InvalidArgument("t1 must be positive");
  const CMatrix hd = secular_dipolar(cluster).m;
  const CMatrix c = correction_scale * effective_correction(cluster, omega1);
  const double half = 0.5 * t1;
  const CMatrix u_plus = Spectrum::of(-0.5 * hd + c).propagator(half);
  const CMatrix u_minus = Spectrum::of(-0.5 * hd - c).propagator(half);
  CMatrix u = Spectrum::of(hd).propagator(half) * u_minus * u_plus;
  return {std::move(u), "A4", t1};
}

}  // namespace dme
