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

#include "dme/pulseprog.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dme/error.hpp"

namespace dme {
namespace {

struct Token {
  std::string text;
  int column;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#')
      ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

class LineParser {
 public:
  LineParser(std::vector<Token> tokens, int line) : toks_(std::move(tokens)), line_(line) {}

  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw ParseError(msg, line_, at.column);
  }
  [[noreturn]] void fail_end(const std::string& msg) const {
    const int col = toks_.empty() ? 1
                                  : toks_.back().column + static_cast<int>(toks_.back().text.size());
    throw ParseError(msg, line_, col);
  }

  const Token& next(const char* what) {
    if (pos_ >= toks_.size()) fail_end(std::string("expected ") + what);
    return toks_[pos_++];
  }

  void expect_word(const char* word) {
    const Token& t = next(word);
    if (t.text != word) fail(std::string("expected '") + word + "', got '" + t.text + "'", t);
  }

  void finish() {
    if (pos_ < toks_.size()) fail("unexpected token '" + toks_[pos_].text + "'", toks_[pos_]);
  }

  // NUMBER immediately followed by one of `units`; returns (value, unit).
  std::pair<double, std::string> number_with_unit(std::initializer_list<const char*> units,
                                                  const char* what, bool unit_optional = false) {
    const Token& t = next(what);
    double value = 0.0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    if (first != last && *first == '+') fail("malformed number '" + t.text + "'", t);
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first || !std::isfinite(value))
      fail("malformed number '" + t.text + "'", t);
    const std::string unit(ptr, last);
    if (unit.empty() && unit_optional) return {value, unit};
    for (const char* u : units)
      if (unit == u) return {value, unit};
    std::string list;
    for (const char* u : units) list += std::string(list.empty() ? "" : "|") + u;
    fail("malformed number/unit '" + t.text + "': expected unit " + list, t);
  }

  double positive_duration(const char* what) {
    const Token& t = toks_[pos_ < toks_.size() ? pos_ : toks_.size() - 1];
    auto [v, unit] = number_with_unit({"us"}, what);
    if (!(v > 0.0)) fail("non-positive duration", t);
    return v;
  }

  Statement statement() {
    const Token& kw = next("statement");
    if (kw.text == "init") return init();
    if (kw.text == "frame") return frame();
    if (kw.text == "pulse") return pulse();
    if (kw.text == "burst") return burst();
    if (kw.text == "delay") {
      const double d = positive_duration("delay duration");
      return stmt::Delay{d};
    }
    if (kw.text == "acquire") return acquire();
    fail("unknown keyword '" + kw.text + "'", kw);
  }

 private:
  Statement init() {
    const Token& t = next("init kind");
    if (t.text == "dipolar") return stmt::Init{InitKind::kDipolar};
    if (t.text == "ix") return stmt::Init{InitKind::kIx};
    if (t.text == "seq2") return stmt::Init{InitKind::kSeq2};
    fail("unknown init kind '" + t.text + "'", t);
  }

  Statement frame() {
    const Token& t = next("frame kind");
    if (t.text == "rotating") return stmt::Frame{FrameKind::kRotating};
    if (t.text == "tilted") return stmt::Frame{FrameKind::kTilted};
    fail("unknown frame kind '" + t.text + "'", t);
  }

  Statement pulse() {
    auto [angle, unit] = number_with_unit({"deg"}, "pulse angle", true);
    const Token& ax = next("pulse axis");
    stmt::Pulse p{angle, Axis::kX, false};
    std::string a = ax.text;
    if (!a.empty() && a[0] == '-') {
      p.negative = true;
      a = a.substr(1);
    }
    if (a == "x")
      p.axis = Axis::kX;
    else if (a == "y")
      p.axis = Axis::kY;
    else if (a == "z")
      p.axis = Axis::kZ;
    else
      fail("bad axis '" + ax.text + "'", ax);
    return p;
  }

  Statement burst() {
    const Token& s = next("burst sign");
    int sign = 0;
    if (s.text == "+")
      sign = 1;
    else if (s.text == "-")
      sign = -1;
    else
      fail("expected burst sign '+' or '-'", s);
    auto [amp, u1] = number_with_unit({"G"}, "burst amplitude");
    const Token& dt = toks_[pos_ < toks_.size() ? pos_ : toks_.size() - 1];
    auto [dur, unit] = number_with_unit({"us", "hc"}, "burst duration");
    if (!(dur > 0.0)) fail("non-positive duration", dt);
    stmt::Burst b{sign, amp, dur, unit == "hc" ? BurstUnit::kHalfCycles : BurstUnit::kMicroseconds};
    if (b.unit == BurstUnit::kHalfCycles && dur != std::floor(dur))
      fail("half-cycle count must be an integer", dt);
    return b;
  }

  Statement acquire() {
    const Token& o = next("observable");
    Axis obs;
    if (o.text == "Ix")
      obs = Axis::kX;
    else if (o.text == "Iy")
      obs = Axis::kY;
    else if (o.text == "Iz")
      obs = Axis::kZ;
    else
      fail("unknown observable '" + o.text + "'", o);
    expect_word("for");
    const double window = positive_duration("acquisition window");
    expect_word("step");
    const double step = positive_duration("acquisition step");
    return stmt::Acquire{obs, window, step};
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int line_;
};

std::string fmt_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const char* init_name(InitKind k) {
  switch (k) {
    case InitKind::kDipolar:
      return "dipolar";
    case InitKind::kIx:
      return "ix";
    case InitKind::kSeq2:
      return "seq2";
  }
  return "?";
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kPi = std::numbers::pi;

}  // namespace

PulseProgram parse_program(const std::string& text) {
  PulseProgram prog;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_init = false, have_frame = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    const Token first = toks.front();
    LineParser lp(std::move(toks), lineno);
    Statement s = lp.statement();
    lp.finish();
    if (std::holds_alternative<stmt::Init>(s)) {
      if (have_init) throw ParseError("duplicate init", lineno, first.column);
      if (!prog.statements.empty()) throw ParseError("init must be the first statement", lineno, first.column);
      have_init = true;
    } else if (!have_init) {
      throw ParseError("missing init", lineno, first.column);
    }
    if (std::holds_alternative<stmt::Frame>(s)) {
      if (have_frame) throw ParseError("more than one frame statement", lineno, first.column);
      if (prog.statements.size() != 1)
        throw ParseError("frame must directly follow init", lineno, first.column);
      have_frame = true;
    }
    prog.add(std::move(s), lineno);
  }
  if (!have_init) throw ParseError("missing init", lineno == 0 ? 1 : lineno, 1);
  return prog;
}

std::string print_program(const PulseProgram& program) {
  std::string out;
  for (const Statement& s : program.statements) {
    std::visit(overloaded{
                   [&](const stmt::Init& v) { out += std::string("init ") + init_name(v.kind); },
                   [&](const stmt::Frame& v) {
                     out += v.kind == FrameKind::kTilted ? "frame tilted" : "frame rotating";
                   },
                   [&](const stmt::Pulse& v) {
                     out += "pulse " + fmt_number(v.angle_deg) + " " + (v.negative ? "-" : "") +
                            axis_name(v.axis);
                   },
                   [&](const stmt::Burst& v) {
                     out += std::string("burst ") + (v.sign > 0 ? "+" : "-") + " " +
                            fmt_number(v.amplitude_gauss) + "G " + fmt_number(v.duration) +
                            (v.unit == BurstUnit::kHalfCycles ? "hc" : "us");
                   },
                   [&](const stmt::Delay& v) { out += "delay " + fmt_number(v.duration_us) + "us"; },
                   [&](const stmt::Acquire& v) {
                     out += "acquire I" + axis_name(v.observable) + " for " + fmt_number(v.window_us) +
                            "us step " + fmt_number(v.step_us) + "us";
                   },
               },
               s);
    out += '\n';
  }
  return out;
}

PulseProgram load_program(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open pulse program '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

std::string HamiltonianSpec::describe() const {
  switch (kind) {
    case HamiltonianKind::kSecular:
      return "Hd";
    case HamiltonianKind::kIdealReversal:
      return "-Hd/2";
    case HamiltonianKind::kTiltedBurst:
      return std::string(sign > 0 ? "+" : "-") + "w1*Iz - Hd/2 + 3/8 P (w1=" + fmt_number(omega1) + ")";
  }
  return "?";
}

double PropagationPlan::total_duration() const {
  double t = 0.0;
  for (const Segment& s : segments) {
    if (const auto* e = std::get_if<seg::EvolveUnder>(&s)) t += e->duration;
    if (const auto* a = std::get_if<seg::AcquireWindow>(&s)) t += a->window;
  }
  return t;
}

PropagationPlan compile(const PulseProgram& program, const SpinCluster& cluster,
                        bool ideal_reversal) {
  if (program.statements.empty() || !std::holds_alternative<stmt::Init>(program.statements.front()))
    throw InvalidArgument("program has no init statement");
  PropagationPlan plan;
  plan.init = std::get<stmt::Init>(program.statements.front()).kind;
  const double gamma = cluster.constants.gamma;
  std::size_t k = 1;
  if (k < program.statements.size()) {
    const Statement& s = program.statements[k];
    if (const auto* f = std::get_if<stmt::Frame>(&s)) {
      plan.frame = f->kind;
      ++k;
    } else if (const auto* p = std::get_if<stmt::Pulse>(&s);
               p && plan.init == InitKind::kDipolar && p->axis == Axis::kY && !p->negative &&
               p->angle_deg == 90.0) {
      plan.frame = FrameKind::kTilted;
      ++k;
    }
  }
  for (; k < program.statements.size(); ++k) {
    const Statement& s = program.statements[k];
    const int line = program.lines.size() > k ? program.lines[k] : 0;
    std::visit(overloaded{
                   [&](const stmt::Init&) {
                     throw InvalidArgument("init must appear exactly once, first");
                   },
                   [&](const stmt::Frame&) {
                     throw InvalidArgument("frame must directly follow init");
                   },
                   [&](const stmt::Pulse& v) {
                     const double rad = v.angle_deg * kPi / 180.0;
                     plan.segments.push_back(seg::InstantRotation{v.axis, v.negative ? -rad : rad});
                   },
                   [&](const stmt::Burst& v) {
                     if (!(v.amplitude_gauss > 0.0))
                       throw InvalidArgument("line " + std::to_string(line) +
                                             ": burst amplitude must be positive");
                     const double w1 = gamma * v.amplitude_gauss;
                     seg::EvolveUnder e;
                     if (v.unit == BurstUnit::kHalfCycles) {
                       const long n = std::lround(v.duration);
                       e.halfcycles = n;
                       e.duration = static_cast<double>(n) * kPi / w1;
                     } else {
                       e.duration = v.duration * 1e-6;
                     }
                     if (ideal_reversal)
                       e.hamiltonian = {HamiltonianKind::kIdealReversal, 1, 0.0};
                     else
                       e.hamiltonian = {HamiltonianKind::kTiltedBurst, v.sign, w1};
                     plan.segments.push_back(e);
                   },
                   [&](const stmt::Delay& v) {
                     plan.segments.push_back(seg::EvolveUnder{
                         {HamiltonianKind::kSecular, 1, 0.0}, v.duration_us * 1e-6, std::nullopt});
                   },
                   [&](const stmt::Acquire& v) {
                     plan.segments.push_back(
                         seg::AcquireWindow{v.observable, v.window_us * 1e-6, v.step_us * 1e-6});
                   },
               },
               s);
  }
  return plan;
}

namespace {

void check_even(long t1_halfcycles) {
  if (t1_halfcycles < 0) throw InvalidArgument("t1 must be non-negative");
  if (t1_halfcycles % 2 != 0)
    throw InvalidArgument("t1 must be an even number of half cycles (each phase a whole number)");
}

void add_bursts(PulseProgram& p, double omega1_gauss, long t1_halfcycles) {
  const double half = static_cast<double>(t1_halfcycles / 2);
  p.add(stmt::Burst{+1, omega1_gauss, half, BurstUnit::kHalfCycles});
  p.add(stmt::Burst{-1, omega1_gauss, half, BurstUnit::kHalfCycles});
}

double halfcycles_to_us(double n, double omega1_gauss, double gamma) {
  return n * kPi / (gamma * omega1_gauss) * 1e6;
}

}  // namespace

PulseProgram builtin_seq1(double omega1_gauss, long t1_halfcycles, double window_us,
                          double step_us, double gamma) {
  check_even(t1_halfcycles);
  PulseProgram p;
  p.add(stmt::Init{InitKind::kDipolar});
  p.add(stmt::Pulse{90.0, Axis::kY, false});
  if (t1_halfcycles > 0) {
    add_bursts(p, omega1_gauss, t1_halfcycles);
    p.add(stmt::Delay{halfcycles_to_us(t1_halfcycles / 2.0, omega1_gauss, gamma)});
  }
  p.add(stmt::Pulse{45.0, Axis::kY, false});
  p.add(stmt::Acquire{Axis::kY, window_us, step_us});
  return p;
}

PulseProgram builtin_seq2(double omega1_gauss, long t1_halfcycles, double window_us,
                          double step_us, double gamma) {
  check_even(t1_halfcycles);
  PulseProgram p;
  p.add(stmt::Init{InitKind::kSeq2});
  if (t1_halfcycles > 0) {
    add_bursts(p, omega1_gauss, t1_halfcycles);
    p.add(stmt::Delay{halfcycles_to_us(t1_halfcycles / 2.0, omega1_gauss, gamma)});
  }
  p.add(stmt::Acquire{Axis::kY, window_us, step_us});
  return p;
}

PulseProgram builtin_rpw(double omega1_gauss, long t1_halfcycles, double window_us,
                         double step_us, double gamma) {
  check_even(t1_halfcycles);
  if (t1_halfcycles == 0) throw InvalidArgument("magic echo needs a non-empty burst");
  PulseProgram p;
  p.add(stmt::Init{InitKind::kIx});
  p.add(stmt::Delay{halfcycles_to_us(t1_halfcycles / 2.0, omega1_gauss, gamma)});
  add_bursts(p, omega1_gauss, t1_halfcycles);
  p.add(stmt::Acquire{Axis::kX, window_us, step_us});
  return p;
}

}  // namespace dme
