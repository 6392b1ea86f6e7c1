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
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "dme/error.hpp"
#include "dme/pulseprog.hpp"

using namespace dme;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void expect_parse_error(const std::string& text, const std::string& msg, int line, int column) {
  try {
    parse_program(text);
    FAIL("expected a parse error for: " << text);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(msg) != std::string::npos);
    CHECK(e.line() == line);
    CHECK(e.column() == column);
  }
}

const char* kSeq1Text =
    "init dipolar\npulse 90 y\nburst + 25.3G 40hc\nburst - 25.3G 40hc\ndelay 100us\npulse 45 y\n"
    "acquire Iy for 60us step 0.5us";

}  // namespace

TEST_CASE("sequence-1 shaped program parses into 7 statements") {
  const PulseProgram p = parse_program(kSeq1Text);
  REQUIRE(p.statements.size() == 7);
  CHECK(std::get<stmt::Init>(p.statements[0]).kind == InitKind::kDipolar);
  const auto& b = std::get<stmt::Burst>(p.statements[2]);
  CHECK(b.sign == 1);
  CHECK(b.amplitude_gauss == 25.3);
  CHECK(b.duration == 40.0);
  CHECK(b.unit == BurstUnit::kHalfCycles);
  CHECK(std::get<stmt::Burst>(p.statements[3]).sign == -1);
  CHECK(std::get<stmt::Delay>(p.statements[4]).duration_us == 100.0);
  const auto& a = std::get<stmt::Acquire>(p.statements[6]);
  CHECK(a.observable == Axis::kY);
  CHECK(a.window_us == 60.0);
  CHECK(a.step_us == 0.5);
  CHECK(p.lines[6] == 7);
}

TEST_CASE("parse errors carry line and column") {
  expect_parse_error("pulse 90 y", "missing init", 1, 1);
  expect_parse_error("init dipolar\nburst 25.3G 40hc", "burst sign", 2, 7);
  expect_parse_error("init ix\n  wait 3us", "unknown keyword", 2, 3);
  expect_parse_error("init ix\ndelay 0us", "non-positive duration", 2, 7);
  expect_parse_error("init ix\ndelay -4us", "non-positive duration", 2, 7);
  expect_parse_error("init ix\ndelay 4ms", "malformed number/unit", 2, 7);
  expect_parse_error("init ix\ndelay 4..2us", "malformed", 2, 7);
  expect_parse_error("init ix\nburst + 3G 2.5hc", "integer", 2, 12);
  expect_parse_error("init ix\ninit ix", "duplicate init", 2, 1);
  expect_parse_error("init ix\ndelay 1us\nframe tilted", "frame must directly follow init", 3, 1);
  expect_parse_error("init ix\npulse 90 w", "bad axis", 2, 10);
  expect_parse_error("init ix\nacquire Iy 60us step 1us", "expected 'for'", 2, 12);
  expect_parse_error("init ix\ndelay 3us extra", "unexpected token", 2, 11);
  expect_parse_error("", "missing init", 1, 1);
}

TEST_CASE("comments, blank lines and optional deg") {
  const PulseProgram p = parse_program("# header\n\ninit ix   # start\n  pulse 45deg -x\n");
  REQUIRE(p.statements.size() == 2);
  const auto& pulse = std::get<stmt::Pulse>(p.statements[1]);
  CHECK(pulse.angle_deg == 45.0);
  CHECK(pulse.negative);
  CHECK(pulse.axis == Axis::kX);
  CHECK(p.lines[1] == 4);
}

TEST_CASE("canonical printer and round trip") {
  const PulseProgram p = parse_program(kSeq1Text);
  const std::string printed = print_program(p);
  CHECK(printed == std::string(kSeq1Text) + "\n");
  CHECK(print_program(parse_program(printed)) == printed);
  const PulseProgram q = parse_program("init seq2\nframe rotating\npulse 12.5deg -z\nburst - 1e1G 3.25us\n");
  CHECK(print_program(q) == "init seq2\nframe rotating\npulse 12.5 -z\nburst - 10G 3.25us\n");
}

TEST_CASE("builtin programs match the golden files") {
  const double g = PhysicalConstants{}.gamma;
  CHECK(print_program(builtin_seq1(25.3, 80, 60, 0.5, g)) == slurp(DME_TEST_DATA "/seq1_golden.pp"));
  CHECK(print_program(builtin_seq2(12.5, 8, 60, 0.5, g)) == slurp(DME_TEST_DATA "/seq2_golden.pp"));
  CHECK(print_program(builtin_rpw(52.6, 6, 60, 0.5, g)) == slurp(DME_TEST_DATA "/rpw_golden.pp"));
  for (const char* f : {"/seq1_golden.pp", "/seq2_golden.pp", "/rpw_golden.pp"}) {
    const std::string text = slurp(std::string(DME_TEST_DATA) + f);
    CHECK(print_program(parse_program(text)) == text);
  }
  CHECK_THROWS_AS(builtin_seq1(25.3, 3, 60, 0.5), InvalidArgument);
  CHECK_THROWS_AS(builtin_rpw(25.3, 0, 60, 0.5), InvalidArgument);
}

TEST_CASE("shipped programs parse and compile") {
  const SpinCluster cl = build_cluster(Orientation::along(OrientationLabel::k100), 2.0, 4);
  for (const char* f : {"/seq1_25G.pp", "/seq2_12G.pp", "/rpw_52G.pp"}) {
    const PulseProgram p = load_program(std::string(DME_PROGRAMS_DIR) + f);
    CHECK_NOTHROW(compile(p, cl, false));
  }
  CHECK_THROWS_AS(load_program("/nonexistent/x.pp"), InvalidArgument);
}

TEST_CASE("compile maps statements to segments") {
  const SpinCluster cl = build_cluster(Orientation::along(OrientationLabel::k100), 2.0, 4);
  const double w1 = cl.constants.gamma * 25.3;
  const PropagationPlan plan = compile(parse_program(kSeq1Text), cl, false);
  CHECK(plan.init == InitKind::kDipolar);
  CHECK(plan.frame == FrameKind::kTilted);  // the 90 y pulse is absorbed
  REQUIRE(plan.segments.size() == 5);
  const auto& b = std::get<seg::EvolveUnder>(plan.segments[0]);
  CHECK(b.hamiltonian == HamiltonianSpec{HamiltonianKind::kTiltedBurst, 1, w1});
  CHECK(b.duration == 40.0 * std::numbers::pi / w1);
  CHECK(b.halfcycles == 40);
  CHECK(std::get<seg::EvolveUnder>(plan.segments[1]).hamiltonian.sign == -1);
  const auto& d = std::get<seg::EvolveUnder>(plan.segments[2]);
  CHECK(d.hamiltonian.kind == HamiltonianKind::kSecular);
  CHECK(d.duration == doctest::Approx(1e-4));
  const auto& r = std::get<seg::InstantRotation>(plan.segments[3]);
  CHECK(r.angle == doctest::Approx(std::numbers::pi / 4));
  const auto& a = std::get<seg::AcquireWindow>(plan.segments[4]);
  CHECK(a.window == doctest::Approx(60e-6));

  const PropagationPlan ideal = compile(parse_program(kSeq1Text), cl, true);
  const auto& bi = std::get<seg::EvolveUnder>(ideal.segments[0]);
  CHECK(bi.hamiltonian.kind == HamiltonianKind::kIdealReversal);
  CHECK(bi.duration == 40.0 * std::numbers::pi / w1);

  // every hc burst is an exact multiple of pi / w1
  for (const Segment& s : plan.segments)
    if (const auto* e = std::get_if<seg::EvolveUnder>(&s); e && e->halfcycles)
      CHECK(e->duration == static_cast<double>(*e->halfcycles) * std::numbers::pi / e->hamiltonian.omega1);

  // without the absorbed pulse the frame stays rotating; negative axes flip the angle
  const PropagationPlan rot = compile(parse_program("init dipolar\npulse 90 -y\n"), cl, false);
  CHECK(rot.frame == FrameKind::kRotating);
  CHECK(std::get<seg::InstantRotation>(rot.segments[0]).angle == doctest::Approx(-std::numbers::pi / 2));
  CHECK(compile(parse_program("init dipolar\nframe tilted\n"), cl, false).frame == FrameKind::kTilted);
  CHECK(plan.total_duration() == doctest::Approx(80.0 * std::numbers::pi / w1 + 1e-4 + 60e-6));

  CHECK_THROWS_WITH_AS(compile(parse_program("init ix\nburst + 0G 4hc\n"), cl, false),
                       doctest::Contains("amplitude"), InvalidArgument);
  CHECK_THROWS_AS(compile(parse_program("init ix\nburst + -2G 4hc\n"), cl, false), InvalidArgument);
}

TEST_CASE("Hamiltonian descriptions") {
  CHECK(HamiltonianSpec{}.describe() == "Hd");
  CHECK(HamiltonianSpec{HamiltonianKind::kIdealReversal, 1, 0}.describe() == "-Hd/2");
  CHECK(HamiltonianSpec{HamiltonianKind::kTiltedBurst, -1, 5}.describe().rfind("-w1*Iz", 0) == 0);
}
