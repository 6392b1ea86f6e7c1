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

// dmecho: command-line front end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dme/csv.hpp"
#include "dme/engine.hpp"
#include "dme/error.hpp"
#include "dme/experiments.hpp"
#include "dme/lattice.hpp"
#include "dme/operators.hpp"
#include "dme/pulseprog.hpp"
#include "dme/simd/kernels.hpp"
#include "dme/thermo.hpp"
#include "dme/verify.hpp"

namespace {

using json = nlohmann::json;
constexpr const char* kVersion = "0.1.0";
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 1;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// --config FILE holds "key=value" lines; each becomes "--key value" placed
// before the user's own flags so that explicit flags win (last one taken).
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::vector<std::string> from_file, rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw dme::InvalidArgument("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    std::ifstream in(path);
    if (!in) throw dme::InvalidArgument("cannot read config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw dme::InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key=value");
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      if (key.empty()) throw dme::InvalidArgument(path + ":" + std::to_string(lineno) + ": empty key");
      if (value == "true") {
        from_file.push_back("--" + key);
      } else if (value != "false") {
        from_file.push_back("--" + key);
        from_file.push_back(value);
      }
    }
  }
  // rest[0] is the program name, rest[1] the subcommand (when present).
  std::vector<std::string> out;
  const std::size_t head = std::min<std::size_t>(rest.size(), 2);
  out.insert(out.end(), rest.begin(), rest.begin() + static_cast<long>(head));
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), rest.begin() + static_cast<long>(head), rest.end());
  return out;
}

struct ClusterOpts {
  std::string orientation = "100";
  double radius = 2.0;
  int max_sites = 6;
};

void add_cluster_opts(CLI::App* cmd, ClusterOpts& o) {
  cmd->add_option("--orientation", o.orientation, "Field direction: 100, 110, 111 or x,y,z")
      ->capture_default_str();
  cmd->add_option("--cluster-radius", o.radius, "Cluster radius in lattice spacings")
      ->capture_default_str();
  cmd->add_option("--max-sites", o.max_sites, "Number of spins in the simulated cluster (<= 12)")
      ->capture_default_str();
}

dme::SpinCluster make(const ClusterOpts& o) {
  return dme::build_cluster(dme::Orientation::parse(o.orientation), o.radius, o.max_sites);
}

json tolerances() {
  return {{"thermo_step_halving", 1e-6},
          {"a3_slice_convergence", 1e-8},
          {"hermitian_check_relative", 1e-10},
          {"spectral_resync_interval", dme::SpectralSeries::kResyncInterval}};
}

void write_manifest(const std::string& out_path, const json& config, const std::string& hash,
                    std::size_t rows, double wall_seconds) {
  json m;
  m["artifact"] = "dmecho";
  m["version"] = kVersion;
  m["config"] = config;
  m["cluster_hash"] = hash;
  m["rows"] = rows;
  m["wall_time_s"] = wall_seconds;
  m["simd_backend"] = dme::simd::active().name;
  m["tolerances"] = tolerances();
  dme::write_file_atomic(out_path + ".manifest.json", m.dump(2) + "\n");
}

std::vector<long> parse_grid(const std::string& text) {
  std::string t = text;
  if (t.size() > 2 && t.compare(t.size() - 2, 2, "hc") == 0) t.resize(t.size() - 2);
  std::vector<long> parts;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size())
      throw dme::InvalidArgument("--t1-grid expects start:stop:step in half cycles, got '" + text + "'");
    parts.push_back(v);
  }
  if (parts.size() == 1) return {parts[0]};
  if (parts.size() != 3 || parts[2] <= 0 || parts[1] < parts[0])
    throw dme::InvalidArgument("--t1-grid expects start:stop:step with step > 0 and stop >= start");
  std::vector<long> grid;
  for (long n = parts[0]; n <= parts[1]; n += parts[2]) grid.push_back(n);
  return grid;
}

// ---------------------------------------------------------------------------

int cmd_lattice_info(const ClusterOpts& co, double sum_radius, bool all) {
  const dme::PhysicalConstants c;
  dme::PhysicalConstants natural = c;
  natural.dipolar_prefactor = dme::PhysicalConstants::kNaturalPrefactor;
  std::vector<std::string> orients =
      all ? std::vector<std::string>{"100", "110", "111"} : std::vector<std::string>{co.orientation};
  std::printf("dipolar prefactor D = %.10g rad s^-1 m^3 (natural %.6g)\n", c.dipolar_prefactor,
              natural.dipolar_prefactor);
  std::printf("%-10s %14s %14s %12s %16s %12s %10s %s\n", "orient", "M2_lattice", "M2_reference",
              "wL/gamma_G", "wL/gamma_nat_G", "M2_cluster", "sites", "cluster_hash");
  for (const auto& o : orients) {
    const auto orient = dme::Orientation::parse(o);
    const double m2 = dme::lattice_second_moment(orient, sum_radius, c);
    const double m2n = dme::lattice_second_moment(orient, sum_radius, natural);
    std::string ref = "-";
    if (orient.label != dme::OrientationLabel::kCustom) ref = fmt(dme::reference_second_moment(orient.label));
    ClusterOpts cc = co;
    cc.orientation = o;
    const auto cl = make(cc);
    std::printf("%-10s %14.6g %14s %12.5g %16.5g %12.6g %10d %s\n", orient.name().c_str(), m2, ref.c_str(),
                std::sqrt(m2 / 3.0) / c.gamma, std::sqrt(m2n / 3.0) / c.gamma, dme::second_moment(cl),
                cl.size(), dme::cluster_hash(cl).c_str());
  }
  return 0;
}

struct RunOpts {
  ClusterOpts cluster;
  std::string sequence = "builtin:seq1";
  double omega1_gauss = 25.3;
  std::string grid = "0:40:2";
  bool ideal = false;
  bool with_thermo = false;
  std::string out;
  unsigned threads = 0;
  double n = 0.45, m_ratio = 0.25, offset_us = 80.0;
};

int cmd_run(const RunOpts& o, const json& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const dme::SpinCluster cl = make(o.cluster);
  dme::Table table;
  if (o.sequence.rfind("builtin:", 0) == 0) {
    const dme::SequenceId id = dme::parse_sequence_id(o.sequence);
    const double w1 = o.omega1_gauss * cl.constants.gamma;
    const std::vector<long> grid = parse_grid(o.grid);
    const dme::SignalCurve curve = dme::sweep_t1(id, cl, w1, grid, o.ideal, o.threads);
    table.meta = curve.meta;
    table.columns = {"t1_us", "amplitude"};
    std::vector<double> thermo;
    if (o.with_thermo) {
      if (id != dme::SequenceId::kSeq1) throw dme::InvalidArgument("--with-thermo applies to builtin:seq1");
      const auto orient = dme::Orientation::parse(o.cluster.orientation);
      const double m2 = dme::reference_second_moment(orient.label);
      const dme::ThermoParams tp{o.n, o.m_ratio, o.offset_us * 1e-6};
      const double a_ideal = dme::sequence1_amplitude(cl, w1, 0, true).amplitude;
      const double t_end = std::max(curve.abscissa.back(), tp.offset + 1e-6) + 1e-6;
      const auto tr = dme::solve_beta(dme::gaussian_kernel_for(m2, tp), t_end, 0.25e-6);
      for (double t : curve.abscissa) {
        // beta on the solver grid, linearly interpolated
        const auto it = std::lower_bound(tr.times.begin(), tr.times.end(), t);
        std::size_t j = static_cast<std::size_t>(it - tr.times.begin());
        double b = tr.beta.back();
        if (j == 0) b = tr.beta.front();
        else if (j < tr.times.size()) {
          const double w = (t - tr.times[j - 1]) / (tr.times[j] - tr.times[j - 1]);
          b = (1 - w) * tr.beta[j - 1] + w * tr.beta[j];
        }
        thermo.push_back(a_ideal * b);
      }
      table.columns.push_back("thermo_amplitude");
      table.meta["thermo_n"] = fmt(o.n);
      table.meta["thermo_m_ratio"] = fmt(o.m_ratio);
      table.meta["thermo_offset_us"] = fmt(o.offset_us);
      table.meta["thermo_a_ideal"] = fmt(a_ideal);
    }
    for (std::size_t k = 0; k < curve.size(); ++k) {
      std::vector<double> row{curve.abscissa[k] * 1e6, curve.values[k]};
      if (o.with_thermo) row.push_back(thermo[k]);
      table.rows.push_back(std::move(row));
    }
  } else {
    const dme::PulseProgram prog = dme::load_program(o.sequence);
    const dme::PropagationPlan plan = dme::compile(prog, cl, o.ideal);
    dme::Engine engine(cl);
    const auto result = engine.evolve(engine.initial_state(plan.init, plan.frame), plan);
    table.meta = {{"sequence", o.sequence},
                  {"orientation", cl.orientation.name()},
                  {"cluster_hash", dme::cluster_hash(cl)},
                  {"sites", std::to_string(cl.size())},
                  {"ideal_reversal", o.ideal ? "true" : "false"},
                  {"macroscopic", "false"}};
    table.columns = {"window", "time_us", "signal"};
    std::vector<std::string> comp;
    if (!result.signals.empty())
      for (const auto& c : result.signals.front().components) comp.push_back(c.first);
    for (const auto& c : comp) table.columns.push_back("signal_" + c);
    for (std::size_t w = 0; w < result.signals.size(); ++w) {
      const auto& s = result.signals[w];
      for (std::size_t k = 0; k < s.times.size(); ++k) {
        std::vector<double> row{static_cast<double>(w), (s.start + s.times[k]) * 1e6, s.total[k]};
        for (const auto& c : s.components) row.push_back(c.second[k]);
        table.rows.push_back(std::move(row));
      }
    }
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.out.empty()) {
    std::cout << dme::format_csv(table);
  } else {
    dme::emit_csv(table, o.out);
    write_manifest(o.out, config, dme::cluster_hash(cl), table.rows.size(), wall);
  }
  return 0;
}

struct ThermoOpts {
  std::string orientation = "100";
  double n = 0.45, m_ratio = 0.25, offset_us = 80.0, t_end_us = 500.0, step_us = 0.5;
  double m2 = 0.0;
  std::string kernel_cluster;
  std::string out;
};

// "<orientation>[,sites=N][,radius=R]"
dme::SpinCluster parse_cluster_spec(const std::string& spec) {
  std::stringstream ss(spec);
  std::string item;
  ClusterOpts o;
  bool first = true;
  while (std::getline(ss, item, ';')) {
    if (first) {
      o.orientation = item;
      first = false;
      continue;
    }
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw dme::InvalidArgument("cluster spec item '" + item + "' needs key=value");
    const std::string k = item.substr(0, eq), v = item.substr(eq + 1);
    try {
      if (k == "sites")
        o.max_sites = std::stoi(v);
      else if (k == "radius")
        o.radius = std::stod(v);
      else
        throw dme::InvalidArgument("unknown cluster spec key '" + k + "'");
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const dme::InvalidArgument*>(&e)) throw;
      throw dme::InvalidArgument("bad value in cluster spec: '" + item + "'");
    }
  }
  return make(o);
}

int cmd_thermo(const ThermoOpts& o, const json& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const double offset = o.offset_us * 1e-6, t_end = o.t_end_us * 1e-6;
  dme::KernelSpec kernel;
  dme::Table table;
  std::string hash = "-";
  if (!o.kernel_cluster.empty()) {
    const dme::SpinCluster cl = parse_cluster_spec(o.kernel_cluster);
    hash = dme::cluster_hash(cl);
    const double span = std::max(t_end - offset, o.step_us * 1e-6);
    std::vector<double> taus;
    const int samples = 2001;
    for (int k = 0; k < samples; ++k) taus.push_back(span * k / (samples - 1));
    const auto mk = dme::microscopic_kernel(cl, taus);
    kernel = mk.kernel;
    kernel.offset = offset;
    table.meta["kernel"] = "microscopic";
    table.meta["kernel_cluster"] = o.kernel_cluster;
    table.meta["kernel_g0_raw"] = fmt(mk.g0_raw);
    table.meta["kernel_sign_flipped"] = mk.sign_flipped ? "true" : "false";
    table.meta["kernel_max_imag"] = fmt(mk.max_imag);
    table.meta["kernel_asymmetry"] = fmt(mk.asymmetry);
    table.meta["cluster_hash"] = hash;
  } else {
    const auto orient = dme::Orientation::parse(o.orientation);
    const double m2 = o.m2 > 0.0 ? o.m2 : dme::reference_second_moment(orient.label);
    kernel = dme::gaussian_kernel_for(m2, {o.n, o.m_ratio, offset});
    table.meta["kernel"] = "gaussian";
    table.meta["orientation"] = orient.name();
    table.meta["m2"] = fmt(m2);
    table.meta["n"] = fmt(o.n);
    table.meta["m_ratio"] = fmt(o.m_ratio);
  }
  table.meta["offset_us"] = fmt(o.offset_us);
  const auto tr = dme::solve_beta(kernel, t_end, o.step_us * 1e-6);
  table.meta["step_us"] = fmt(tr.step * 1e6);
  table.meta["method"] = tr.method;
  table.meta["refinements"] = std::to_string(tr.refinements);
  dme::SignalCurve curve{tr.times, tr.beta, {}};
  const auto td = dme::decay_time(curve);
  table.meta["t_d_us"] = fmt(td.t_d * 1e6);
  table.meta["t_d_method"] = td.method;
  table.meta["t_d_censored"] = td.censored ? "true" : "false";
  table.columns = {"t_us", "beta"};
  for (std::size_t k = 0; k < tr.times.size(); ++k) table.rows.push_back({tr.times[k] * 1e6, tr.beta[k]});
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.out.empty()) {
    std::cout << dme::format_csv(table);
  } else {
    dme::emit_csv(table, o.out);
    write_manifest(o.out, config, hash, table.rows.size(), wall);
  }
  return 0;
}

int cmd_verify(std::uint64_t seed, int cases) {
  const auto results = dme::run_invariants({seed, cases});
  int failed = 0;
  for (const auto& r : results) {
    std::printf("%s  %-48s value=%.3g limit=%.3g %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.value,
                r.limit, r.detail.c_str());
    failed += r.pass ? 0 : 1;
  }
  std::printf("%zu checks, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}

int cmd_dump(const ClusterOpts& co, const std::string& name, double omega1_gauss, const std::string& out) {
  const dme::SpinCluster cl = make(co);
  const int n = cl.size();
  dme::CMatrix m;
  if (name == "Hd") m = dme::secular_dipolar(cl).m;
  else if (name == "P") m = dme::nonsecular_pair_raising(cl).p.m;
  else if (name == "H2") m = dme::nonsecular_pair_raising(cl).raising.m;
  else if (name == "Q") m = dme::operator_Q(cl).m;
  else if (name == "Ix") m = dme::collective(dme::Axis::kX, n).m;
  else if (name == "Iy") m = dme::collective(dme::Axis::kY, n).m;
  else if (name == "Iz") m = dme::collective(dme::Axis::kZ, n).m;
  else if (name == "H1") m = dme::magnus_first_correction(cl, omega1_gauss * cl.constants.gamma).h1.m;
  else throw dme::InvalidArgument("unknown operator '" + name + "' (Hd, P, H2, Q, Ix, Iy, Iz, H1)");
  dme::Table t;
  t.meta = {{"operator", name}, {"orientation", cl.orientation.name()}, {"cluster_hash", dme::cluster_hash(cl)},
            {"dim", std::to_string(m.rows())}};
  t.columns = {"row", "col", "re", "im"};
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (m(r, c) != std::complex<double>(0.0, 0.0))
        t.rows.push_back({static_cast<double>(r), static_cast<double>(c), m(r, c).real(), m(r, c).imag()});
  if (out.empty()) std::cout << dme::format_csv(t);
  else dme::emit_csv(t, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dmecho: magic-echo spin-dynamics laboratory for dipolar-coupled spin clusters"};
  app.set_version_flag("--version", std::string("dmecho ") + kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string unused_config;
  app.add_option("--config", unused_config,
                 "File of key=value lines supplying flag defaults (explicit flags win)");

  ClusterOpts info_cluster;
  double sum_radius = dme::PhysicalConstants::kCalibrationRadius;
  bool info_all = false;
  auto* info = app.add_subcommand("lattice-info", "Second moments, local fields and cluster summary");
  add_cluster_opts(info, info_cluster);
  info->add_option("--sum-radius", sum_radius, "Lattice-sum radius in spacings")->capture_default_str();
  info->add_flag("--all", info_all, "Report all three principal orientations");

  RunOpts run;
  auto* run_cmd = app.add_subcommand("run", "Run a pulse sequence (builtin sweep or .pp program)");
  add_cluster_opts(run_cmd, run.cluster);
  run_cmd->add_option("--sequence", run.sequence, "builtin:seq1, builtin:seq2, builtin:rpw or a .pp file")
      ->capture_default_str();
  run_cmd->add_option("--omega1-gauss", run.omega1_gauss, "Burst amplitude w1/gamma in gauss")
      ->capture_default_str();
  run_cmd->add_option("--t1-grid", run.grid, "start:stop:step burst length in half cycles (e.g. 2:40:2hc)")
      ->capture_default_str();
  run_cmd->add_flag("--ideal", run.ideal, "Replace bursts by exact -Hd/2 evolution");
  run_cmd->add_flag("--with-thermo", run.with_thermo, "Add the memory-kernel prediction column (seq1)");
  run_cmd->add_option("--n", run.n, "Thermo kernel n (with --with-thermo)")->capture_default_str();
  run_cmd->add_option("--m-ratio", run.m_ratio, "Thermo kernel M/M2 (with --with-thermo)")->capture_default_str();
  run_cmd->add_option("--offset-us", run.offset_us, "Thermo kernel offset in us")->capture_default_str();
  run_cmd->add_option("--threads", run.threads, "Sweep workers (0 = hardware concurrency)")->capture_default_str();
  run_cmd->add_option("--out", run.out, "Output CSV path (stdout when omitted); a .manifest.json is written alongside");

  ThermoOpts th;
  auto* th_cmd = app.add_subcommand("thermo", "Solve the inverse-temperature memory equation");
  th_cmd->add_option("--orientation", th.orientation, "100, 110 or 111")->capture_default_str();
  th_cmd->add_option("--n", th.n, "Kernel strength n")->capture_default_str();
  th_cmd->add_option("--m-ratio", th.m_ratio, "Gaussian width M as a fraction of M2")->capture_default_str();
  th_cmd->add_option("--m2", th.m2, "Second moment override in s^-2 (default: reference value)");
  th_cmd->add_option("--offset-us", th.offset_us, "Kernel onset delay in us")->capture_default_str();
  th_cmd->add_option("--t-end-us", th.t_end_us, "End time in us")->capture_default_str();
  th_cmd->add_option("--step-us", th.step_us, "Initial solver step in us (halved until converged)")
      ->capture_default_str();
  th_cmd->add_option("--kernel-from-cluster", th.kernel_cluster,
                     "Use the microscopic kernel of a cluster: '<orientation>[;sites=N][;radius=R]'");
  th_cmd->add_option("--out", th.out, "Output CSV path (stdout when omitted)");

  std::uint64_t seed = 20260117;
  int cases = 20;
  auto* ver = app.add_subcommand("verify", "Run the invariant suites");
  ver->add_option("--seed", seed, "Seed for randomized checks")->capture_default_str();
  ver->add_option("--cases", cases, "Random cases per suite")->capture_default_str();

  ClusterOpts dump_cluster;
  std::string dump_name = "Hd", dump_out;
  double dump_w1 = 25.3;
  auto* dump = app.add_subcommand("dump-operator", "Write an operator as CSV (row, col, re, im)");
  add_cluster_opts(dump, dump_cluster);
  dump->add_option("--name", dump_name, "Hd, P, H2, Q, Ix, Iy, Iz or H1")->capture_default_str();
  dump->add_option("--omega1-gauss", dump_w1, "w1/gamma for H1")->capture_default_str();
  dump->add_option("--out", dump_out, "Output path (stdout when omitted)");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args));
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    try {
      app.parse(rev);
    } catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? 0 : kExitConfig;
    }
    const std::string sub = app.get_subcommands().front()->get_name();
    json config = json::object();
    for (const auto* opt : app.get_subcommands().front()->get_options()) {
      if (opt->get_name() == "--help" || opt->get_lnames().empty()) continue;
      const auto results = opt->results();
      config[opt->get_lnames().front()] = results.empty() ? opt->get_default_str() : results.back();
    }
    config["command"] = sub;
    if (sub == "lattice-info") return cmd_lattice_info(info_cluster, sum_radius, info_all);
    if (sub == "run") return cmd_run(run, config);
    if (sub == "thermo") return cmd_thermo(th, config);
    if (sub == "verify") return cmd_verify(seed, cases);
    if (sub == "dump-operator") return cmd_dump(dump_cluster, dump_name, dump_w1, dump_out);
  } catch (const dme::ConvergenceError& e) {
    std::cerr << "dmecho: not converged: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "dmecho: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
