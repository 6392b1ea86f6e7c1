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

// Canned measurements: FID, the two dipolar magic-echo sequences, the
// free-induction magic echo, t1 sweeps and decay-time extraction.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dme/engine.hpp"
#include "dme/lattice.hpp"

namespace dme {

struct SignalCurve {
  std::vector<double> abscissa;  // seconds
  std::vector<double> values;
  std::map<std::string, std::string> meta;

  std::size_t size() const { return values.size(); }
  /// Abscissa strictly increasing and all values finite.
  bool valid() const;
};

struct DecayEstimate {
  double t_d = 0.0;  // seconds; the last abscissa when censored
  bool censored = false;
  std::string method = "one-over-e";
};

enum class SequenceId { kSeq1, kSeq2, kRpw };
SequenceId parse_sequence_id(const std::string& text);
std::string sequence_name(SequenceId id);

struct AcquisitionGrid {
  double window = 0.0;  // seconds
  double step = 0.0;
};

/// Window [0, 5 / w_L] in 400 steps; falls back to `fallback` seconds when
/// the cluster has no couplings.
AcquisitionGrid default_acquisition(const SpinCluster& cluster, double fallback = 1e-4);

/// G(t) = Tr(I_x(t) I_x) / Tr(I_x^2), from cosine sums over the H_d spectrum.
SignalCurve fid(const SpinCluster& cluster, double window, double step);
/// dG/dt on the same grid.
SignalCurve fid_derivative(const SpinCluster& cluster, double window, double step);
/// max |G'(t)| over the default acquisition grid.
double max_fid_slope(const SpinCluster& cluster);

/// Converts a burst length in seconds to a half-cycle count; throws unless
/// t1 is an even multiple of pi / w1 (each phase a whole number of half cycles).
long halfcycles_for(double t1, double omega1);

struct EchoAmplitude {
  double t1 = 0.0;              // seconds
  long halfcycles = 0;
  double amplitude = 0.0;       // peak |s| of the dipolar-order-borne component
  double hd_amplitude = 0.0;    // peak |s| of the H_d-borne component (seq1)
  double total_amplitude = 0.0; // peak |s| of the full signal
  SignalCurve signal;           // acquired total signal
};

/// Sequence 1: tilted dipolar order, phase-alternated burst of t1, free
/// evolution t1/2, 45 deg y pulse, I_y readout.
EchoAmplitude sequence1_amplitude(const SpinCluster& cluster, double omega1, long t1_halfcycles,
                                  bool ideal_reversal);
/// Sequence 2: dipolar order after a 45 deg pulse, phase-alternated burst of
/// t1, free evolution t1/2, I_y readout of the Q-borne signal.
EchoAmplitude sequence2_amplitude(const SpinCluster& cluster, double omega1, long t1_halfcycles,
                                  bool ideal_reversal);

/// Free-induction magic echo: free evolution tau, then a burst of 2 tau.
/// tau is snapped to a whole number of half cycles; the snapped value is in
/// meta["tau_us"]. The curve is the I_x signal after the burst.
SignalCurve rpw_magic_echo(const SpinCluster& cluster, double omega1, double tau,
                           bool ideal_reversal);
double peak_abs(const std::vector<double>& v);

/// Amplitude vs t1 (seconds) over a grid of half-cycle counts; points run
/// on up to `threads` workers and are merged in grid order.
SignalCurve sweep_t1(SequenceId sequence, const SpinCluster& cluster, double omega1,
                     const std::vector<long>& t1_halfcycles, bool ideal_reversal,
                     unsigned threads = 0);

/// First crossing of threshold * value[0], linearly interpolated.
DecayEstimate decay_time(const SignalCurve& curve, double threshold = 0.36787944117144233);

}  // namespace dme
