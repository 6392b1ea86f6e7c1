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

#include "dme/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "dme/error.hpp"
#include "dme/spectral.hpp"

namespace dme {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kAcquisitionSteps = 400;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::map<std::string, std::string> base_meta(const SpinCluster& cluster, double omega1,
                                             const std::string& sequence, bool ideal) {
  return {{"orientation", cluster.orientation.name()},
          {"omega1_rad_s", fmt(omega1)},
          {"omega1_gauss", fmt(omega1 / cluster.constants.gamma)},
          {"sequence", sequence},
          {"cluster_hash", cluster_hash(cluster)},
          {"sites", std::to_string(cluster.size())},
          {"ideal_reversal", ideal ? "true" : "false"},
          {"macroscopic", "false"},
          {"amplitude_unit", sequence == "rpw" || sequence == "fid" ? "1" : "s^-1"}};
}

struct FidSpectrum {
  std::vector<double> freqs;
  std::vector<double> weights;
};

FidSpectrum fid_spectrum(const SpinCluster& cluster) {
  const Spectrum spec = Spectrum::of(secular_dipolar(cluster).m);
  const CMatrix ix = collective(Axis::kX, cluster.size()).m;
  const CMatrix x = spec.to_eigenbasis(ix);
  const double norm = (ix * ix).trace().real();
  FidSpectrum out;
  for (Eigen::Index m = 0; m < x.rows(); ++m)
    for (Eigen::Index n = 0; n < x.cols(); ++n) {
      const double w = std::norm(x(m, n));
      if (w == 0.0) continue;
      out.freqs.push_back(spec.values(m) - spec.values(n));
      out.weights.push_back(w / norm);
    }
  return out;
}

void check_grid(double window, double step) {
  if (!(window > 0.0) || !(step > 0.0)) throw InvalidArgument("window and step must be positive");
}

void check_halfcycles(long n) {
  if (n < 0) throw InvalidArgument("t1 must be non-negative");
  if (n % 2 != 0) throw InvalidArgument("t1 must be an even number of half cycles");
}

double amplitude_of(const AcquiredSignal& sig, const char* component) {
  for (const auto& [name, v] : sig.components)
    if (name == component) return peak_abs(v);
  return 0.0;
}

EchoAmplitude run_sequence(SequenceId id, const SpinCluster& cluster, double omega1, long n,
                           bool ideal) {
  if (!(omega1 > 0.0)) throw InvalidArgument("omega1 must be positive");
  check_halfcycles(n);
  const AcquisitionGrid grid = default_acquisition(cluster);
  const double g = cluster.constants.gamma;
  const double gauss = omega1 / g;
  const PulseProgram prog =
      id == SequenceId::kSeq1
          ? builtin_seq1(gauss, n, grid.window * 1e6, grid.step * 1e6, g)
          : builtin_seq2(gauss, n, grid.window * 1e6, grid.step * 1e6, g);
  const PropagationPlan plan = compile(prog, cluster, ideal);
  Engine engine(cluster);
  const auto result = engine.evolve(engine.initial_state(plan.init, plan.frame), plan);
  const AcquiredSignal& sig = result.signals.at(0);

  EchoAmplitude out;
  out.halfcycles = n;
  out.t1 = static_cast<double>(n) * kPi / omega1;
  if (id == SequenceId::kSeq1) {
    out.amplitude = amplitude_of(sig, "P");
    out.hd_amplitude = amplitude_of(sig, "Hd");
  } else {
    out.amplitude = amplitude_of(sig, "Q");
    out.hd_amplitude = amplitude_of(sig, "Hd");
  }
  out.total_amplitude = peak_abs(sig.total);
  out.signal.abscissa = sig.times;
  out.signal.values = sig.total;
  out.signal.meta = base_meta(cluster, omega1, sequence_name(id), ideal);
  out.signal.meta["t1_us"] = fmt(out.t1 * 1e6);
  out.signal.meta["abscissa"] = "acquisition time";
  return out;
}

SignalCurve run_rpw(const SpinCluster& cluster, double omega1, long n, bool ideal) {
  const double g = cluster.constants.gamma;
  const AcquisitionGrid grid = default_acquisition(cluster, 2.0 * static_cast<double>(n) * kPi / omega1);
  const PropagationPlan plan =
      compile(builtin_rpw(omega1 / g, n, grid.window * 1e6, grid.step * 1e6, g), cluster, ideal);
  Engine engine(cluster);
  const auto result = engine.evolve(engine.initial_state(plan.init, plan.frame), plan);
  const AcquiredSignal& sig = result.signals.at(0);
  SignalCurve out{sig.times, sig.total, base_meta(cluster, omega1, "rpw", ideal)};
  out.meta["tau_us"] = fmt(0.5 * static_cast<double>(n) * kPi / omega1 * 1e6);
  out.meta["echo_peak"] = fmt(peak_abs(sig.total));
  out.meta["abscissa"] = "time after burst";
  return out;
}

}  // namespace

bool SignalCurve::valid() const {
  if (abscissa.size() != values.size()) return false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k]) || !std::isfinite(abscissa[k])) return false;
    if (k > 0 && !(abscissa[k] > abscissa[k - 1])) return false;
  }
  return true;
}

SequenceId parse_sequence_id(const std::string& text) {
  std::string t = text;
  if (t.rfind("builtin:", 0) == 0) t = t.substr(8);
  if (t == "seq1") return SequenceId::kSeq1;
  if (t == "seq2") return SequenceId::kSeq2;
  if (t == "rpw") return SequenceId::kRpw;
  throw InvalidArgument("unknown sequence '" + text + "' (seq1, seq2, rpw)");
}

std::string sequence_name(SequenceId id) {
  switch (id) {
    case SequenceId::kSeq1:
      return "seq1";
    case SequenceId::kSeq2:
      return "seq2";
    case SequenceId::kRpw:
      return "rpw";
  }
  return "?";
}

AcquisitionGrid default_acquisition(const SpinCluster& cluster, double fallback) {
  const double wl = local_field(cluster);
  const double window = wl > 0.0 ? 5.0 / wl : fallback;
  return {window, window / kAcquisitionSteps};
}

SignalCurve fid(const SpinCluster& cluster, double window, double step) {
  check_grid(window, step);
  const FidSpectrum fs = fid_spectrum(cluster);
  const int count = static_cast<int>(std::floor(window / step + 1e-9)) + 1;
  SignalCurve out;
  out.meta = base_meta(cluster, 0.0, "fid", false);
  out.abscissa.resize(count);
  out.values.resize(count);
  for (int k = 0; k < count; ++k) {
    const double t = k * step;
    double g = 0.0;
    for (std::size_t j = 0; j < fs.freqs.size(); ++j) g += fs.weights[j] * std::cos(fs.freqs[j] * t);
    out.abscissa[k] = t;
    out.values[k] = g;
  }
  return out;
}

SignalCurve fid_derivative(const SpinCluster& cluster, double window, double step) {
  check_grid(window, step);
  const FidSpectrum fs = fid_spectrum(cluster);
  const int count = static_cast<int>(std::floor(window / step + 1e-9)) + 1;
  SignalCurve out;
  out.meta = base_meta(cluster, 0.0, "fid-derivative", false);
  out.abscissa.resize(count);
  out.values.resize(count);
  for (int k = 0; k < count; ++k) {
    const double t = k * step;
    double g = 0.0;
    for (std::size_t j = 0; j < fs.freqs.size(); ++j)
      g -= fs.weights[j] * fs.freqs[j] * std::sin(fs.freqs[j] * t);
    out.abscissa[k] = t;
    out.values[k] = g;
  }
  return out;
}

double max_fid_slope(const SpinCluster& cluster) {
  const AcquisitionGrid grid = default_acquisition(cluster);
  return peak_abs(fid_derivative(cluster, grid.window, grid.step).values);
}

long halfcycles_for(double t1, double omega1) {
  if (!(omega1 > 0.0)) throw InvalidArgument("omega1 must be positive");
  if (t1 < 0.0) throw InvalidArgument("t1 must be non-negative");
  const double n = t1 * omega1 / kPi;
  const double r = std::round(n);
  if (std::abs(n - r) > 1e-6 * std::max(1.0, r))
    throw InvalidArgument("t1 is not an integer multiple of pi/omega1");
  const long k = std::lround(r);
  check_halfcycles(k);
  return k;
}

EchoAmplitude sequence1_amplitude(const SpinCluster& cluster, double omega1, long t1_halfcycles,
                                  bool ideal_reversal) {
  return run_sequence(SequenceId::kSeq1, cluster, omega1, t1_halfcycles, ideal_reversal);
}

EchoAmplitude sequence2_amplitude(const SpinCluster& cluster, double omega1, long t1_halfcycles,
                                  bool ideal_reversal) {
  return run_sequence(SequenceId::kSeq2, cluster, omega1, t1_halfcycles, ideal_reversal);
}

SignalCurve rpw_magic_echo(const SpinCluster& cluster, double omega1, double tau,
                           bool ideal_reversal) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (!(omega1 > 0.0)) throw InvalidArgument("omega1 must be positive");
  const long half = std::max(1L, std::lround(tau * omega1 / kPi));
  return run_rpw(cluster, omega1, 2 * half, ideal_reversal);
}

double peak_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

SignalCurve sweep_t1(SequenceId sequence, const SpinCluster& cluster, double omega1,
                     const std::vector<long>& t1_halfcycles, bool ideal_reversal,
                     unsigned threads) {
  for (long n : t1_halfcycles) {
    check_halfcycles(n);
    if (sequence == SequenceId::kRpw && n == 0)
      throw InvalidArgument("the free-induction echo needs a non-empty burst");
  }
  const std::size_t count = t1_halfcycles.size();
  std::vector<double> values(count);
  std::vector<std::exception_ptr> errors(count);
  auto work = [&](std::size_t k) {
    try {
      const long n = t1_halfcycles[k];
      if (sequence == SequenceId::kRpw)
        values[k] = peak_abs(run_rpw(cluster, omega1, n, ideal_reversal).values);
      else
        values[k] = run_sequence(sequence, cluster, omega1, n, ideal_reversal).amplitude;
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < count; k += threads) work(k);
      });
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  SignalCurve out;
  out.meta = base_meta(cluster, omega1, sequence_name(sequence), ideal_reversal);
  out.meta["abscissa"] = "t1";
  out.abscissa.reserve(count);
  for (long n : t1_halfcycles) out.abscissa.push_back(static_cast<double>(n) * kPi / omega1);
  out.values = std::move(values);
  return out;
}

DecayEstimate decay_time(const SignalCurve& curve, double threshold) {
  if (curve.values.size() < 3 || curve.abscissa.size() != curve.values.size())
    throw InvalidArgument("decay_time needs at least 3 points");
  const double v0 = curve.values.front();
  if (!(v0 > 0.0)) throw InvalidArgument("decay_time needs a positive first value");
  const double level = threshold * v0;
  DecayEstimate est;
  for (std::size_t k = 1; k < curve.values.size(); ++k) {
    if (curve.values[k] <= level) {
      const double a = curve.values[k - 1], b = curve.values[k];
      const double ta = curve.abscissa[k - 1], tb = curve.abscissa[k];
      est.t_d = a == b ? tb : ta + (a - level) / (a - b) * (tb - ta);
      return est;
    }
  }
  est.censored = true;
  est.t_d = curve.abscissa.back();
  return est;
}

}  // namespace dme
