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

// Line-oriented pulse-program language.
//
//   program := line*
//   line    := [stmt] ["#" comment] EOL
//   stmt    := init | frame | pulse | burst | delay | acquire
//   init    := "init" ("dipolar" | "ix" | "seq2")
//   frame   := "frame" ("rotating" | "tilted")
//   pulse   := "pulse" NUMBER["deg"] AXIS
//   burst   := "burst" ("+" | "-") NUMBER"G" NUMBER("us" | "hc")
//   delay   := "delay" NUMBER"us"
//   acquire := "acquire" ("Ix" | "Iy" | "Iz") "for" NUMBER"us" "step" NUMBER"us"
//   AXIS    := "x" | "y" | "z" | "-x" | "-y" | "-z"
//
// Units are glued to their number ("25.3G", "40hc", "100us").

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dme/lattice.hpp"
#include "dme/operators.hpp"

namespace dme {

enum class InitKind { kDipolar, kIx, kSeq2 };
enum class FrameKind { kRotating, kTilted };
enum class BurstUnit { kMicroseconds, kHalfCycles };

namespace stmt {
struct Init {
  InitKind kind;
};
struct Frame {
  FrameKind kind;
};
struct Pulse {
  double angle_deg;
  Axis axis;
  bool negative = false;
};
struct Burst {
  int sign;  // +1 or -1
  double amplitude_gauss;
  double duration;  // microseconds or half-cycle count, per unit
  BurstUnit unit;
};
struct Delay {
  double duration_us;
};
struct Acquire {
  Axis observable;
  double window_us;
  double step_us;
};
}  // namespace stmt

using Statement =
    std::variant<stmt::Init, stmt::Frame, stmt::Pulse, stmt::Burst, stmt::Delay, stmt::Acquire>;

struct PulseProgram {
  std::vector<Statement> statements;
  std::vector<int> lines;  // source line of each statement, 0 when synthesised

  void add(Statement s, int line = 0) {
    statements.push_back(std::move(s));
    lines.push_back(line);
  }
};

PulseProgram parse_program(const std::string& text);
/// Canonical text form; parse_program(print_program(p)) reproduces p.
std::string print_program(const PulseProgram& program);
PulseProgram load_program(const std::string& path);

enum class HamiltonianKind {
  kSecular,         // H_d (free evolution)
  kTiltedBurst,     // sign * w1 I_z - H_d / 2 + 3/8 P
  kIdealReversal,   // -H_d / 2
};

struct HamiltonianSpec {
  HamiltonianKind kind = HamiltonianKind::kSecular;
  int sign = 1;
  double omega1 = 0.0;

  bool operator==(const HamiltonianSpec&) const = default;
  std::string describe() const;
};

namespace seg {
struct InstantRotation {
  Axis axis;
  double angle;  // radians, already signed
};
struct EvolveUnder {
  HamiltonianSpec hamiltonian;
  double duration;            // seconds
  std::optional<long> halfcycles;  // set when given as a half-cycle count
};
struct AcquireWindow {
  Axis observable;
  double window;  // seconds
  double step;    // seconds
};
}  // namespace seg

using Segment = std::variant<seg::InstantRotation, seg::EvolveUnder, seg::AcquireWindow>;

struct PropagationPlan {
  InitKind init = InitKind::kDipolar;
  FrameKind frame = FrameKind::kRotating;
  std::vector<Segment> segments;

  double total_duration() const;
};

/// Compiles a program for a cluster. Burst amplitudes are converted with the
/// cluster's gamma. With `ideal_reversal`, bursts evolve under -H_d/2.
/// A "pulse 90 y" directly after "init dipolar" is the tilted-frame transfer
/// and is absorbed into the initial state.
PropagationPlan compile(const PulseProgram& program, const SpinCluster& cluster,
                        bool ideal_reversal);

// Builtin programs. Amplitudes in gauss, times in microseconds.

/// `t1_halfcycles` is the total burst length and must be even so that each
/// phase lasts a whole number of half cycles. The free-evolution delay is
/// written in microseconds using `gamma`.

/// init dipolar / pulse 90 y / burst + / burst - / delay t1/2 / pulse 45 y / acquire Iy
PulseProgram builtin_seq1(double omega1_gauss, long t1_halfcycles, double window_us,
                          double step_us, double gamma = PhysicalConstants{}.gamma);
/// init seq2 / burst + / burst - / delay t1/2 / acquire Iy
PulseProgram builtin_seq2(double omega1_gauss, long t1_halfcycles, double window_us,
                          double step_us, double gamma = PhysicalConstants{}.gamma);
/// init ix / delay tau / burst + / burst - / acquire Ix, with 2 tau = t1.
PulseProgram builtin_rpw(double omega1_gauss, long t1_halfcycles, double window_us,
                         double step_us, double gamma = PhysicalConstants{}.gamma);

}  // namespace dme
