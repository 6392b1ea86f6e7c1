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

// Acceptance checks, one pass/fail line per check.
//   acceptance            run every criterion
//   acceptance 3 6        run criteria 3 and 6
// Exit status is non-zero when any selected check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dme/csv.hpp"
#include "dme/engine.hpp"
#include "dme/experiments.hpp"
#include "dme/lattice.hpp"
#include "dme/operators.hpp"
#include "dme/pulseprog.hpp"
#include "dme/thermo.hpp"
#include "dme/verify.hpp"

using namespace dme;

namespace {

int g_failed = 0;

void report(int criterion, const std::string& what, bool pass, const std::string& detail) {
  std::printf("criterion %d | %-4s | %s | %s\n", criterion, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failed;
}

std::string f(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

SpinCluster cluster(OrientationLabel o, int n) { return build_cluster(Orientation::along(o), 2.0, n); }

void criterion1() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  double tilt = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
  for (int k = 0; k < 100; ++k) {
    const SpinCluster cl = random_cluster(2 + k % 5, 500 + static_cast<std::uint64_t>(k));
    const Operator hd = secular_dipolar(cl);
    const TiltReport r = tilt_decompose(hd, angle(rng), cl);
    tilt = std::max(tilt, r.residual / r.hd_norm);
    const CMatrix iz = collective(Axis::kZ, cl.size()).m;
    const CMatrix h2 = nonsecular_pair_raising(cl).raising.m;
    const CMatrix q = operator_Q(cl).m;
    const double s = hd.norm();
    c1 = std::max(c1, commutator(hd.m, iz).norm() / s);
    c2 = std::max(c2, (commutator(iz, h2) - 2.0 * h2).norm() / s);
    c3 = std::max(c3, (commutator(iz, commutator(iz, q)) - q).norm() / s);
  }
  report(1, "tilt decomposition, 100 random (cluster, theta)", tilt < 1e-10,
         f("max residual/||Hd|| = %.2e (limit 1e-10)", tilt));
  report(1, "[Hd, Iz] = 0", c1 < 1e-12, f("max relative norm %.2e", c1));
  report(1, "[Iz, H(2)] = 2 H(2)", c2 < 1e-12, f("max relative norm %.2e", c2));
  report(1, "[Iz, [Iz, Q]] = Q", c3 < 1e-12, f("max relative norm %.2e", c3));
}

void criterion2() {
  const SpinCluster cl = cluster(OrientationLabel::k100, 6);
  const double wl = local_field(cl), w1 = 10 * wl;
  const double peak = peak_abs(rpw_magic_echo(cl, w1, 3.0 / wl, true).values);
  report(2, "(a) ideal free-induction echo restores the FID peak", std::abs(peak - 1.0) < 1e-6,
         f("peak = %.12f", peak));

  const double slope = max_fid_slope(cl);
  double lo = INFINITY, hi = 0.0;
  for (long n : {0L, 4L, 12L, 40L, 80L}) {
    const double a = sequence1_amplitude(cl, w1, n, true).amplitude;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  report(2, "(b) ideal seq1 amplitude is t1-invariant", (hi - lo) < 1e-6 * hi,
         f("relative spread %.2e over t1 in {0..80} hc", (hi - lo) / hi));
  const double ratio = hi / (3.0 / 16.0 * slope);
  report(2, "(b) ideal seq1 amplitude = (3/16) max|G'|", std::abs(ratio - 1.0) < 0.01,
         f("amplitude / ((3/16) max|G'|) = %.6f; amplitude / max|G'| = %.6f", ratio, hi / slope));

  const double s2 = sequence2_amplitude(cl, w1, 12, true).amplitude;
  const double s1 = sequence1_amplitude(cl, w1, 12, true).amplitude;
  report(2, "(c) ideal seq2 / seq1 = 2", std::abs(s2 / s1 - 2.0) < 1e-6, f("ratio = %.12f", s2 / s1));
}

void criterion3() {
  for (int n = 4; n <= 6; ++n) {
    const SpinCluster cl = cluster(OrientationLabel::k100, n);
    const double wl = local_field(cl), w1 = 10 * wl;
    const long hc = std::max(1L, std::lround(4.0 / wl * w1 / std::numbers::pi));
    const double e0 = verify_average_hamiltonian(cl, w1, hc, 0);
    const double e0d = verify_average_hamiltonian(cl, 2 * w1, 2 * hc, 0);
    const double e1 = verify_average_hamiltonian(cl, w1, hc, 1);
    const double r = e0d / e0;
    report(3, "order-0 error ratio when w1 doubles, N=" + std::to_string(n), r >= 0.2 && r <= 0.7,
           f("ratio = %.4f (range [0.2, 0.7])", r));
    report(3, "order-1 error < order-0 error at 10 wL, N=" + std::to_string(n), e1 < e0,
           f("order 0 = %.3e, order 1 = %.3e", e0, e1));
  }
}

void criterion4() {
  const double r = PhysicalConstants::kCalibrationRadius;
  const double m100 = lattice_second_moment(Orientation::along(OrientationLabel::k100), r);
  const double m110 = lattice_second_moment(Orientation::along(OrientationLabel::k110), r);
  const double m111 = lattice_second_moment(Orientation::along(OrientationLabel::k111), r);
  const double r3 = lattice_second_moment(Orientation::along(OrientationLabel::k100), 3.0) /
                    lattice_second_moment(Orientation::along(OrientationLabel::k111), 3.0);
  report(4, "M2[100]/M2[111] = 5.0 +- 0.5", std::abs(m100 / m111 - 5.0) <= 0.5,
         f("ratio = %.4f at radius 12 (%.4f at radius 3)", m100 / m111, r3));
  report(4, "calibrated M2[100] = 2.55e10", std::abs(m100 / 2.55e10 - 1.0) < 1e-9, f("M2[100] = %.10e", m100));
  report(4, "M2[110] within 15% of 0.99e10", std::abs(m110 / 0.99e10 - 1.0) < 0.15,
         f("M2[110] = %.4e (%+.1f%%)", m110, 100 * (m110 / 0.99e10 - 1.0)));
  report(4, "M2[111] within 15% of 0.50e10", std::abs(m111 / 0.50e10 - 1.0) < 0.15,
         f("M2[111] = %.4e (%+.1f%%)", m111, 100 * (m111 / 0.50e10 - 1.0)));
  double worst = 0.0;
  for (auto o : {OrientationLabel::k100, OrientationLabel::k110, OrientationLabel::k111})
    for (int n = 4; n <= 8; ++n) {
      const SpinCluster cl = cluster(o, n);
      const double m2 = second_moment(cl);
      const double h = 1e-3 / std::sqrt(m2);
      const SignalCurve g = fid(cl, 2 * h, h);
      worst = std::max(worst, std::abs(-2.0 * (g.values[1] - g.values[0]) / (h * h) / m2 - 1.0));
    }
  report(4, "-G''(0) = M2 on simulated clusters", worst < 1e-3, f("max relative deviation %.2e (15 clusters)", worst));
}

void criterion5() {
  // Full-lattice estimate: ||H1|| scales as M2 / w1.
  const double r = PhysicalConstants::kCalibrationRadius;
  const double m100 = lattice_second_moment(Orientation::along(OrientationLabel::k100), r);
  const double m111 = lattice_second_moment(Orientation::along(OrientationLabel::k111), r);
  const double ratio = (m100 / 12.5) / (m111 / 52.6);
  report(5, "||H1|| ratio [100]@12.5G / [111]@52.6G = 20 +- 4", std::abs(ratio - 20.0) <= 4.0,
         f("lattice estimate M2/w1 ratio = %.3f", ratio));
  const double g = PhysicalConstants{}.gamma;
  for (int n : {4, 6, 8}) {
    const double a = magnus_first_correction(cluster(OrientationLabel::k100, n), g * 12.5).h1.norm();
    const double b = magnus_first_correction(cluster(OrientationLabel::k111, n), g * 52.6).h1.norm();
    std::printf("criterion 5 | info | finite cluster N=%d operator-norm ratio %.3f\n", n, a / b);
  }
}

void criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  const double t_end = 4.0 * std::numbers::pi;
  const BetaTrajectory c = solve_beta(KernelSpec::constant(1.0, t_end), t_end, 0.02);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.times.size(); ++k) worst = std::max(worst, std::abs(c.beta[k] - std::cos(c.times[k])));
  report(6, "constant-kernel cosine oracle", worst < 1e-6, f("max error %.2e over [0, 4 pi]", worst));

  double td[3];
  double early = 1.0;
  const OrientationLabel labels[3] = {OrientationLabel::k100, OrientationLabel::k110, OrientationLabel::k111};
  for (int k = 0; k < 3; ++k) {
    const BetaTrajectory tr = solve_beta(gaussian_kernel_for(reference_second_moment(labels[k])), 600e-6, 1e-6);
    td[k] = decay_time(SignalCurve{tr.times, tr.beta, {}}).t_d;
    for (std::size_t j = 0; j < tr.times.size(); ++j)
      if (tr.times[j] < 80e-6) early = std::min(early, tr.beta[j]);
  }
  report(6, "t_d[100] < t_d[110] < t_d[111]", td[0] < td[1] && td[1] < td[2],
         f("t_d = %.1f / %.1f / %.1f us", td[0] * 1e6, td[1] * 1e6, td[2] * 1e6));
  report(6, "all t_d <= 350 us", std::max({td[0], td[1], td[2]}) <= 350e-6,
         f("max t_d = %.1f us", std::max({td[0], td[1], td[2]}) * 1e6));
  report(6, "beta >= 0.99 before 80 us", early >= 0.99, f("min beta = %.6f", early));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(6, "runtime < 10 s", secs < 10.0, f("%.2f s", secs));
}

void criterion7() {
  const SpinCluster cl = cluster(OrientationLabel::k100, 6);
  const double w1 = PhysicalConstants{}.gamma * 25.3;
  std::vector<long> grid;
  for (long n = 0; n * std::numbers::pi / w1 <= 350e-6 + 1e-12; n += 2) grid.push_back(n);
  const SignalCurve sim = sweep_t1(SequenceId::kSeq1, cl, w1, grid, true);
  const double a_ideal = sim.values.front();
  const BetaTrajectory tr =
      solve_beta(gaussian_kernel_for(reference_second_moment(OrientationLabel::k100)), 360e-6, 0.5e-6);
  double max_diff = 0.0, flat = 0.0;
  for (std::size_t k = 0; k < sim.size(); ++k) {
    const double t = sim.abscissa[k];
    std::size_t j = 0;
    while (j + 1 < tr.times.size() && tr.times[j + 1] <= t) ++j;
    double b = tr.beta[j];
    if (j + 1 < tr.times.size()) {
      const double w = (t - tr.times[j]) / (tr.times[j + 1] - tr.times[j]);
      b = (1 - w) * tr.beta[j] + w * tr.beta[j + 1];
    }
    max_diff = std::max(max_diff, std::abs(sim.values[k] - a_ideal * b));
    flat = std::max(flat, std::abs(sim.values[k] - a_ideal));
  }
  report(7, "unitary ideal seq1 curve is flat", flat < 1e-6 * a_ideal,
         f("max deviation / A_ideal = %.2e over %g points", flat / a_ideal, static_cast<double>(sim.size())));
  report(7, "memory-kernel curve departs by > 0.5 A_ideal by 350 us", max_diff > 0.5 * a_ideal,
         f("max |sim - thermo| / A_ideal = %.4f", max_diff / a_ideal));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion8() {
  const double g = PhysicalConstants{}.gamma;
  const std::string dir = DME_TEST_DATA;
  struct Golden {
    const char* name;
    PulseProgram prog;
  };
  const Golden goldens[] = {{"seq1", builtin_seq1(25.3, 80, 60, 0.5, g)},
                            {"seq2", builtin_seq2(12.5, 8, 60, 0.5, g)},
                            {"rpw", builtin_rpw(52.6, 6, 60, 0.5, g)}};
  for (const auto& gd : goldens) {
    const std::string want = slurp(dir + "/" + gd.name + "_golden.pp");
    const std::string got = print_program(gd.prog);
    report(8, std::string("golden builtin ") + gd.name, !want.empty() && got == want,
           got == want ? "byte-identical" : "differs from golden file");
    const std::string again = print_program(parse_program(got));
    report(8, std::string("parse . print idempotent for ") + gd.name, again == got, again == got ? "stable" : "changed");
  }
  Table t;
  t.meta = {{"k", "v"}};
  t.columns = {"x", "y"};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 200; ++k) t.rows.push_back({u(rng), u(rng) * 1e-9});
  const Table back = parse_csv_text(format_csv(t));
  double worst = 0.0;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (int c = 0; c < 2; ++c) worst = std::max(worst, std::abs(back.rows[r][c] / t.rows[r][c] - 1.0));
  report(8, "CSV round trip to 12 digits", worst < 5e-12 && back.meta == t.meta,
         f("max relative error %.2e", worst));
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 2;
    }
    selected.push_back(k);
  }
  if (selected.empty())
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);
  for (int k : selected) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      report(k, "completed without error", false, e.what());
    }
    std::printf("criterion %d | time | %.2f s\n", k,
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return g_failed == 0 ? 0 : 1;
}
