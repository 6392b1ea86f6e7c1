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

#include "dme/thermo.hpp"

#include <algorithm>
#include <cmath>

#include "dme/error.hpp"
#include "dme/operators.hpp"
#include "dme/simd/kernels.hpp"
#include "dme/spectral.hpp"

namespace dme {

KernelSpec KernelSpec::gaussian(double n, double omega_l, double m, double offset) {
  KernelSpec k;
  k.kind = Kind::kGaussian;
  k.n = n;
  k.omega_l = omega_l;
  k.m = m;
  k.offset = offset;
  k.validate();
  return k;
}

KernelSpec KernelSpec::tabulated(std::vector<double> times, std::vector<double> values,
                                 double offset) {
  KernelSpec k;
  k.kind = Kind::kTabulated;
  k.times = std::move(times);
  k.values = std::move(values);
  k.offset = offset;
  k.validate();
  return k;
}

KernelSpec KernelSpec::constant(double g, double horizon) {
  return tabulated({0.0, horizon}, {g, g});
}

void KernelSpec::validate() const {
  if (!(offset >= 0.0) || !std::isfinite(offset)) throw InvalidArgument("kernel offset must be >= 0");
  if (kind == Kind::kGaussian) {
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("gaussian kernel needs n > 0");
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("gaussian kernel needs M > 0");
    if (!(omega_l >= 0.0) || !std::isfinite(omega_l)) throw InvalidArgument("gaussian kernel needs w_L >= 0");
    return;
  }
  if (times.size() < 2 || times.size() != values.size())
    throw InvalidArgument("tabulated kernel needs >= 2 matching samples");
  if (times.front() != 0.0) throw InvalidArgument("tabulated kernel must start at tau = 0");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(values[k]) || !std::isfinite(times[k]))
      throw InvalidArgument("tabulated kernel has non-finite samples");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw InvalidArgument("tabulated kernel times must increase");
  }
}

double KernelSpec::horizon() const {
  return kind == Kind::kGaussian ? INFINITY : times.back();
}

double KernelSpec::operator()(double tau) const {
  tau = std::abs(tau);
  if (kind == Kind::kGaussian) {
    const double a = n * omega_l;
    return a * a * std::exp(-0.5 * m * tau * tau);
  }
  if (tau >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), tau);
  const std::size_t j = static_cast<std::size_t>(it - times.begin());
  const double t0 = times[j - 1], t1 = times[j];
  const double w = (tau - t0) / (t1 - t0);
  return (1.0 - w) * values[j - 1] + w * values[j];
}

double reference_second_moment(OrientationLabel label) {
  switch (label) {
    case OrientationLabel::k100:
      return 2.55e10;
    case OrientationLabel::k110:
      return 0.99e10;
    case OrientationLabel::k111:
      return 0.50e10;
    case OrientationLabel::kCustom:
      break;
  }
  throw InvalidArgument("no reference second moment for a custom orientation");
}

KernelSpec gaussian_kernel_for(double second_moment, const ThermoParams& params) {
  if (!(second_moment > 0.0)) throw InvalidArgument("second moment must be positive");
  return KernelSpec::gaussian(params.n, std::sqrt(second_moment / 3.0),
                              params.m_ratio * second_moment, params.offset);
}

namespace {

// Solution on the shifted clock s = t - offset over [0, span] with `steps` steps.
std::vector<double> solve_shifted(const KernelSpec& kernel, double span, long steps) {
  const double h = span / static_cast<double>(steps);
  const std::size_t n = static_cast<std::size_t>(steps);
  // krev[n - j] = G1(j h) so that sum_k beta_k G1((m - k) h) is a contiguous dot.
  std::vector<double> krev(n + 1);
  for (std::size_t j = 0; j <= n; ++j) krev[n - j] = kernel(static_cast<double>(j) * h);
  const double k0 = krev[n];
  std::vector<double> beta(n + 1, 0.0);
  beta[0] = 1.0;
  auto memory = [&](std::size_t m) {
    if (m == 0) return 0.0;
    const double full = simd::dot({beta.data(), m + 1}, {krev.data() + (n - m), m + 1});
    return h * (full - 0.5 * (beta[0] * krev[n - m] + beta[m] * k0));
  };
  double f = 0.0;  // d beta / ds at the current point
  for (std::size_t m = 0; m < n; ++m) {
    beta[m + 1] = beta[m] + h * f;
    const double fp = -memory(m + 1);
    beta[m + 1] = beta[m] + 0.5 * h * (f + fp);
    f = -memory(m + 1);
  }
  return beta;
}

BetaTrajectory assemble(const KernelSpec& kernel, double t_end, double span, long steps,
                        const std::vector<double>& shifted) {
  BetaTrajectory out;
  const double h = span > 0.0 ? span / static_cast<double>(steps) : 0.0;
  out.step = h;
  const double offset = std::min(kernel.offset, t_end);
  const double pre_step = h > 0.0 ? h : t_end / static_cast<double>(std::max(1L, steps));
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * pre_step;
    if (t >= offset - 1e-15 * t_end) break;
    out.times.push_back(t);
    out.beta.push_back(1.0);
  }
  if (span > 0.0) {
    for (std::size_t j = 0; j < shifted.size(); ++j) {
      out.times.push_back(offset + static_cast<double>(j) * h);
      out.beta.push_back(shifted[j]);
    }
  } else {
    out.times.push_back(t_end);
    out.beta.push_back(1.0);
  }
  return out;
}

void check_inputs(const KernelSpec& kernel, double t_end, double step) {
  kernel.validate();
  if (!(step > 0.0)) throw InvalidArgument("step must be positive");
  if (!(t_end > step)) throw InvalidArgument("t_end must exceed the step");
  const double span = t_end - kernel.offset;
  if (span > kernel.horizon() * (1.0 + 1e-12))
    throw InvalidArgument("tabulated kernel does not cover the requested time span");
}

}  // namespace

BetaTrajectory solve_beta_fixed(const KernelSpec& kernel, double t_end, double step) {
  check_inputs(kernel, t_end, step);
  const double span = t_end - kernel.offset;
  if (span <= 0.0) {
    auto out = assemble(kernel, t_end, 0.0, static_cast<long>(std::ceil(t_end / step)), {});
    out.converged = true;
    return out;
  }
  const long steps = std::max(1L, static_cast<long>(std::ceil(span / step - 1e-9)));
  auto out = assemble(kernel, t_end, span, steps, solve_shifted(kernel, span, steps));
  out.converged = true;
  return out;
}

BetaTrajectory solve_beta(const KernelSpec& kernel, double t_end, double step,
                          const SolverControl& control) {
  check_inputs(kernel, t_end, step);
  const double span = t_end - kernel.offset;
  if (span <= 0.0) return solve_beta_fixed(kernel, t_end, step);
  long steps = std::max(1L, static_cast<long>(std::ceil(span / step - 1e-9)));
  std::vector<double> coarse = solve_shifted(kernel, span, steps);
  double change = INFINITY;
  for (int r = 1; r <= control.max_refinements; ++r) {
    steps *= 2;
    std::vector<double> fine = solve_shifted(kernel, span, steps);
    change = 0.0;
    for (std::size_t j = 0; j < coarse.size(); ++j)
      change = std::max(change, std::abs(coarse[j] - fine[2 * j]));
    coarse = std::move(fine);
    if (change < control.tolerance) {
      auto out = assemble(kernel, t_end, span, steps, coarse);
      out.converged = true;
      out.refinements = r;
      out.last_change = change;
      return out;
    }
  }
  throw ConvergenceError("beta solver did not converge after " +
                         std::to_string(control.max_refinements) +
                         " step halvings (last change " + std::to_string(change) + ")");
}

double short_time_check(const KernelSpec& kernel) {
  if (kernel.kind != KernelSpec::Kind::kGaussian)
    throw InvalidArgument("short_time_check needs a gaussian kernel");
  if (kernel.n == 0.0) return 0.0;
  kernel.validate();
  KernelSpec k = kernel;
  k.offset = 0.0;
  const double span = 0.1 / std::sqrt(k.m);
  const BetaTrajectory tr = solve_beta(k, span, span / 200.0);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    const double t2 = tr.times[j] * tr.times[j];
    num += (1.0 - tr.beta[j]) * t2;
    den += t2 * t2;
  }
  return num / den;
}

MicroscopicKernel microscopic_kernel(const SpinCluster& cluster, const std::vector<double>& taus) {
  const int n = cluster.size();
  if (n > 8) throw InvalidArgument("dimension overflow: microscopic kernel supports N <= 8");
  if (taus.empty()) throw InvalidArgument("empty tau grid");
  for (std::size_t k = 0; k < taus.size(); ++k)
    if (taus[k] < 0.0 || (k > 0 && !(taus[k] > taus[k - 1])))
      throw InvalidArgument("tau grid must be non-negative and increasing");

  const DoubleQuantum dq = nonsecular_pair_raising(cluster);
  const double norm = (dq.raising.m * dq.lowering.m).trace().real();
  if (!(norm > 1e-300)) throw InvalidArgument("degenerate kernel");
  const Spectrum spec = Spectrum::of(secular_dipolar(cluster).m);

  // Sum over pairs of A_ij' o B_ij'^T in the H_d eigenbasis, where
  // A = [h2_ij, H(-2)], B = [h(-2)_ij, H(2)].
  CMatrix w = CMatrix::Zero(spec.values.size(), spec.values.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      if (cluster.couplings(i, j) == 0.0) continue;
      const CMatrix h2 = pair_raising(cluster, i, j).m;
      const CMatrix a = spec.to_eigenbasis(commutator(h2, dq.lowering.m));
      const CMatrix b = spec.to_eigenbasis(commutator(h2.adjoint(), dq.raising.m));
      w += a.cwiseProduct(b.transpose());
    }
  w *= (9.0 / 64.0) / norm;
  // Tr(A e^{iH tau/2} B e^{-iH tau/2}) = sum_mn W_mn e^{-i(l_m - l_n) tau/2}
  SpectralSeries series(spec.values, w);

  MicroscopicKernel out;
  const std::complex<double> g0 = series.at(0.0);
  out.g0_raw = g0.real();
  if (out.g0_raw == 0.0) throw InvalidArgument("degenerate kernel");
  out.sign_flipped = out.g0_raw < 0.0;
  const double sgn = out.sign_flipped ? -1.0 : 1.0;
  const double scale = std::abs(out.g0_raw);
  std::vector<double> values(taus.size());
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const std::complex<double> g = series.at(0.5 * taus[k]);
    const std::complex<double> gm = series.at(-0.5 * taus[k]);
    out.max_imag = std::max(out.max_imag, std::abs(g.imag()) / scale);
    out.asymmetry = std::max(out.asymmetry, std::abs(g - gm) / scale);
    values[k] = sgn * g.real();
  }
  std::vector<double> times = taus;
  if (times.front() != 0.0) {
    times.insert(times.begin(), 0.0);
    values.insert(values.begin(), sgn * out.g0_raw);
  }
  if (times.size() < 2) {
    times.push_back(times.back() + 1.0);
    values.push_back(values.back());
  }
  out.kernel = KernelSpec::tabulated(std::move(times), std::move(values));
  return out;
}

double fit_gaussian_decay(const std::vector<double>& taus, const std::vector<double>& values,
                          double floor) {
  if (taus.size() != values.size() || taus.empty()) throw InvalidArgument("fit: size mismatch");
  const double v0 = values.front();
  if (v0 == 0.0) throw InvalidArgument("fit: zero reference value");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const double r = std::abs(values[k] / v0);
    if (!(r > floor) || taus[k] == 0.0) continue;
    const double t2 = taus[k] * taus[k];
    num += std::log(r) * t2;
    den += t2 * t2;
  }
  if (den == 0.0) throw InvalidArgument("fit: no usable points");
  return -2.0 * num / den;
}

SignalCurve thermo_signal(const BetaTrajectory& trajectory, double a_ideal) {
  SignalCurve out;
  out.abscissa = trajectory.times;
  out.values.reserve(trajectory.beta.size());
  for (double b : trajectory.beta) out.values.push_back(a_ideal * b);
  out.meta["sequence"] = "thermo";
  out.meta["abscissa"] = "t1";
  out.meta["macroscopic"] = "true";
  return out;
}

}  // namespace dme
