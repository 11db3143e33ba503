// Copyright 2026 The gsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// gsim command-line tool. Talks to the simulator only through the C API.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gsim/gsim.h"

namespace {

#ifndef GSIM_DEFAULT_CONFIG_DIR
#define GSIM_DEFAULT_CONFIG_DIR "configs"
#endif
#ifndef GSIM_DEFAULT_DATA_DIR
#define GSIM_DEFAULT_DATA_DIR "data"
#endif

// Carries a failed status up to main.
struct Failure {
  gsim_status status;
  std::string message;
};

void check(gsim_status s) {
  if (s != GSIM_OK) throw Failure{s, gsim_last_error()};
}

[[noreturn]] void usage_error(const std::string& detail) {
  throw Failure{GSIM_ERR_VALIDATION, "invalid argument: " + detail};
}

struct StrDeleter {
  void operator()(char* p) const { gsim_string_free(p); }
};
using Str = std::unique_ptr<char, StrDeleter>;

struct PlanDeleter {
  void operator()(gsim_plan* p) const { gsim_plan_free(p); }
};
struct TensorDeleter {
  void operator()(gsim_tensor* p) const { gsim_tensor_free(p); }
};
struct RunDeleter {
  void operator()(gsim_run* p) const { gsim_run_free(p); }
};
using Plan = std::unique_ptr<gsim_plan, PlanDeleter>;
using Tensor = std::unique_ptr<gsim_tensor, TensorDeleter>;
using Run = std::unique_ptr<gsim_run, RunDeleter>;

std::string take(char* s) {
  Str owned(s);
  return s ? std::string(s) : std::string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out.flush()) throw Failure{GSIM_ERR_IO, "i/o error: cannot write " + path};
}

std::string config_dir() {
  const char* env = std::getenv("GSIM_CONFIG_DIR");
  return (env && *env) ? env : GSIM_DEFAULT_CONFIG_DIR;
}

std::string default_table() {
  const char* env = std::getenv("GSIM_DATA_DIR");
  return std::string((env && *env) ? env : GSIM_DEFAULT_DATA_DIR) + "/encoder_cycles.csv";
}

Plan load_plan(const std::string& path) {
  gsim_plan* p = nullptr;
  check(gsim_plan_load(path.c_str(), &p));
  return Plan(p);
}

// ---- commands ---------------------------------------------------------------

struct SynthArgs {
  std::string preset = "tiny";
  int layers = 0;
  uint64_t seed = 1;
  std::string archive, out;
};

void cmd_synth(const SynthArgs& a) {
  if (a.archive.empty() && a.out.empty()) usage_error("give --archive and/or --out");
  check(gsim_synth_model(a.preset.c_str(), a.layers, a.seed,
                         a.archive.empty() ? nullptr : a.archive.c_str(),
                         a.out.empty() ? nullptr : a.out.c_str()));
  if (!a.archive.empty()) std::cout << "archive: " << a.archive << "\n";
  if (!a.out.empty()) std::cout << "model: " << a.out << "\n";
}

struct DescribeArgs {
  std::string preset = "tiny";
  int layers = 0;
  int nodes = 0;
  std::string out;
};

void cmd_describe(const DescribeArgs& a) {
  check(gsim_write_descriptions(a.preset.c_str(), a.layers, a.nodes, a.out.c_str()));
  std::cout << "wrote " << a.out << "/layers.json and " << a.out << "/clusters.json\n";
}

struct BuildArgs {
  std::string config;
  std::string layers, clusters, model, out, report, skeleton;
};

void cmd_build(BuildArgs a) {
  if (!a.config.empty()) {
    const std::string dir = config_dir() + "/" + a.config;
    if (a.layers.empty()) a.layers = dir + "/layers.json";
    if (a.clusters.empty()) a.clusters = dir + "/clusters.json";
  }
  if (a.layers.empty() || a.clusters.empty()) {
    usage_error("give --config or both --layers and --clusters");
  }
  gsim_plan* raw = nullptr;
  check(gsim_plan_build(a.layers.c_str(), a.clusters.c_str(), a.model.c_str(), &raw));
  Plan plan(raw);
  check(gsim_plan_save(plan.get(), a.out.c_str()));
  char* s = nullptr;
  check(gsim_plan_summary(plan.get(), &s));
  const std::string summary = take(s);
  check(gsim_plan_validate(plan.get(), &s));
  const std::string problems = take(s);
  const std::string report = summary + "problems = " +
                             std::to_string(std::count(problems.begin(), problems.end(), '\n')) +
                             "\n";
  if (!a.report.empty()) write_text(a.report, report);
  if (!a.skeleton.empty()) {
    size_t n = 0;
    check(gsim_plan_emit_skeleton(plan.get(), a.skeleton.c_str(), &n));
    std::cout << "skeleton: " << n << " files under " << a.skeleton << "\n";
  }
  std::cout << "plan: " << a.out << "\n" << report;
}

struct RunArgs {
  std::string plan, input, output, trace, report;
  int random_rows = 0;
  uint64_t seed = 1;
  uint64_t interval = 0;
  uint64_t budget = 0;
  double loss = -1;
  int64_t net_seed = -1;
};

int cmd_run(const RunArgs& a) {
  Plan plan = load_plan(a.plan);
  gsim_tensor* raw = nullptr;
  if (!a.input.empty()) {
    check(gsim_tensor_load(a.input.c_str(), &raw));
  } else if (a.random_rows > 0) {
    int max_rows = 0, cols = 0;
    check(gsim_plan_input_shape(plan.get(), &max_rows, &cols));
    check(gsim_tensor_random(a.random_rows, cols, a.seed, &raw));
  } else {
    usage_error("give --input or --random-rows");
  }
  Tensor input(raw);
  gsim_run_options o;
  gsim_run_options_init(&o);
  o.interval = a.interval;
  o.cycle_budget = a.budget;
  o.loss_probability = a.loss;
  o.seed = a.net_seed;
  gsim_run* r = nullptr;
  check(gsim_run_plan(plan.get(), input.get(), &o, &r));
  Run run(r);
  if (!a.trace.empty()) check(gsim_run_write_trace(run.get(), a.trace.c_str()));
  int complete = 0;
  check(gsim_run_complete(run.get(), &complete));
  if (!complete) {
    std::cerr << "simulation fault: run incomplete (packets lost or cycle budget reached)\n";
    return GSIM_ERR_SIMULATION;
  }
  char* s = nullptr;
  check(gsim_run_report(run.get(), &s));
  const std::string report = take(s);
  if (!a.report.empty()) write_text(a.report, report);
  if (!a.output.empty()) {
    gsim_tensor* out = nullptr;
    check(gsim_run_output(run.get(), &out));
    Tensor owned(out);
    check(gsim_tensor_save(owned.get(), a.output.c_str()));
  }
  std::cout << report;
  return 0;
}

struct ForwardArgs {
  std::string model, input, output;
};

void cmd_forward(const ForwardArgs& a) {
  gsim_tensor* raw = nullptr;
  check(gsim_tensor_load(a.input.c_str(), &raw));
  Tensor input(raw);
  check(gsim_model_forward(a.model.c_str(), input.get(), &raw));
  Tensor out(raw);
  check(gsim_tensor_save(out.get(), a.output.c_str()));
  int rows = 0, cols = 0;
  check(gsim_tensor_shape(out.get(), &rows, &cols));
  std::cout << "output: " << a.output << " (" << rows << " x " << cols << ")\n";
}

struct EstimateArgs {
  std::string table, report, target = "ultrascale", preset = "ibert-base", csv;
  int layers = 12;
  double d = -1;  // < 0: the report's value, or 1.1 us for tables
  double f = -1;  // < 0: the report's value, or 200 MHz for tables
  int seq = 0;
  double interpolate = 0;
};

void cmd_estimate(const EstimateArgs& a) {
  char* text = nullptr;
  char* csv = nullptr;
  std::string t, c;
  if (a.target == "versal") {
    check(gsim_estimate_versal(a.preset.c_str(), a.layers, &text, &csv));
  } else if (a.target != "ultrascale") {
    usage_error("--target must be ultrascale or versal");
  } else if (!a.report.empty()) {
    if (a.seq < 1) usage_error("--seq is required with --trace");
    check(gsim_estimate_report(a.report.c_str(), a.layers, a.d, a.f, a.seq, &text, &csv));
  } else {
    const std::string table = a.table.empty() ? default_table() : a.table;
    const double d = a.d < 0 ? 1.1e-6 : a.d;
    const double f = a.f < 0 ? 200e6 : a.f;
    if (a.interpolate > 0) {
      double lat = 0, lat0 = 0, tp = 0;
      check(gsim_estimate_seq(table.c_str(), a.interpolate, a.layers, d, f, &lat, &lat0, &tp));
      char line[256];
      std::snprintf(line, sizeof line,
                    "seq,latency_ms,latency_no_switch_ms,throughput_per_s\n%g,%.6f,%.6f,%.2f\n",
                    a.interpolate, lat * 1e3, lat0 * 1e3, tp);
      c = line;
      std::snprintf(line, sizeof line,
                    "seq %g (interpolated): %.3f ms, %.3f ms with d = 0, %.1f inf/s\n",
                    a.interpolate, lat * 1e3, lat0 * 1e3, tp);
      t = line;
    } else {
      check(gsim_estimate_table(table.c_str(), a.layers, d, f, &text, &csv));
    }
  }
  if (text != nullptr) {
    t = take(text);
    c = take(csv);
  }
  if (!a.csv.empty()) write_text(a.csv, c);
  std::cout << t;
}

struct VerifyArgs {
  std::string plan, kernel = "all", csv;
  int rows = 4;
  int instances = 100;
  int full = 0;
  uint64_t seed = 1;
};

int cmd_verify(const VerifyArgs& a) {
  char* text = nullptr;
  char* csv = nullptr;
  int pass = 0;
  if (!a.plan.empty()) {
    Plan plan = load_plan(a.plan);
    check(gsim_verify_plan(plan.get(), a.rows, a.seed, &text, &csv, &pass));
  } else {
    check(gsim_verify_kernels(a.kernel.c_str(), a.instances, a.full, a.seed, &text, &csv, &pass));
  }
  const std::string t = take(text), c = take(csv);
  if (!a.csv.empty()) write_text(a.csv, c);
  std::cout << t << (pass ? "all PASS\n" : "FAIL\n");
  return pass ? 0 : GSIM_ERR_VALIDATION;
}

struct TensorArgs {
  int rows = 1, cols = 8;
  uint64_t seed = 1;
  std::string out, a, b;
};

void cmd_tensor_random(const TensorArgs& a) {
  gsim_tensor* raw = nullptr;
  check(gsim_tensor_random(a.rows, a.cols, a.seed, &raw));
  Tensor t(raw);
  check(gsim_tensor_save(t.get(), a.out.c_str()));
  std::cout << "tensor: " << a.out << " (" << a.rows << " x " << a.cols << ")\n";
}

int cmd_tensor_compare(const TensorArgs& a) {
  gsim_tensor* ra = nullptr;
  gsim_tensor* rb = nullptr;
  check(gsim_tensor_load(a.a.c_str(), &ra));
  Tensor ta(ra);
  check(gsim_tensor_load(a.b.c_str(), &rb));
  Tensor tb(rb);
  int eq = 0;
  check(gsim_tensor_equal(ta.get(), tb.get(), &eq));
  std::cout << (eq ? "identical\n" : "different\n");
  return eq ? 0 : GSIM_ERR_VALIDATION;
}

void cmd_tensor_show(const TensorArgs& a) {
  gsim_tensor* raw = nullptr;
  check(gsim_tensor_load(a.a.c_str(), &raw));
  Tensor t(raw);
  int rows = 0, cols = 0;
  check(gsim_tensor_shape(t.get(), &rows, &cols));
  std::vector<int8_t> data(size_t(rows) * cols);
  check(gsim_tensor_copy(t.get(), data.data(), data.size()));
  std::cout << rows << " x " << cols << "\n";
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) std::cout << (c ? " " : "") << int(data[size_t(r) * cols + c]);
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gsim: multi-FPGA transformer cluster simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gsim_version());
  int status = 0;

  SynthArgs synth;
  auto* s = app.add_subcommand("synth-model", "Synthesize deterministic model parameters");
  s->add_option("--preset", synth.preset, "ibert-base or tiny")->capture_default_str();
  s->add_option("--layers", synth.layers, "Encoder count (default: preset)");
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--archive", synth.archive, "Write a parameter archive");
  s->add_option("--out", synth.out, "Write a model directory");
  s->callback([&] { cmd_synth(synth); });

  std::string archive, import_out;
  auto* im = app.add_subcommand("import", "Validate an archive and write its model directory");
  im->add_option("archive", archive)->required();
  im->add_option("out", import_out)->required();
  im->callback([&] {
    check(gsim_import_archive(archive.c_str(), import_out.c_str()));
    std::cout << "model: " << import_out << "\n";
  });

  DescribeArgs describe;
  auto* de = app.add_subcommand("describe", "Write layer and cluster descriptions of a preset");
  de->add_option("--preset", describe.preset)->capture_default_str();
  de->add_option("--layers", describe.layers, "Encoder count (default: preset)");
  de->add_option("--nodes", describe.nodes, "Nodes per cluster (default: preset)");
  de->add_option("--out", describe.out)->required();
  de->callback([&] { cmd_describe(describe); });

  BuildArgs build;
  auto* bu = app.add_subcommand("build", "Build a deployment plan");
  bu->add_option("--config", build.config, "Config name under $GSIM_CONFIG_DIR");
  bu->add_option("--layers", build.layers, "Layer description JSON");
  bu->add_option("--clusters", build.clusters, "Cluster description JSON");
  bu->add_option("--model", build.model, "Model directory")->required();
  bu->add_option("--out", build.out, "Plan JSON")->required();
  bu->add_option("--report", build.report, "Key-value build report");
  bu->add_option("--emit-skeleton", build.skeleton, "Write per-kernel stub sources here");
  bu->callback([&] { cmd_build(build); });

  RunArgs run;
  auto* ru = app.add_subcommand("run", "Stream a tensor through a plan");
  ru->add_option("--plan", run.plan)->required();
  ru->add_option("--input", run.input, "Input tensor blob");
  ru->add_option("--random-rows", run.random_rows, "Random input with this many rows");
  ru->add_option("--seed", run.seed, "Seed of the random input")->capture_default_str();
  ru->add_option("--output", run.output, "Output tensor blob");
  ru->add_option("--trace", run.trace, "Event trace CSV");
  ru->add_option("--report", run.report, "X/T/I key-value report");
  ru->add_option("--interval", run.interval, "Cycles between injected rows (0 = line rate)");
  ru->add_option("--budget", run.budget, "Cycle budget (0 = unlimited)");
  ru->add_option("--loss", run.loss, "Packet loss probability override");
  ru->add_option("--net-seed", run.net_seed, "Network RNG seed override");
  ru->callback([&] { status = cmd_run(run); });

  ForwardArgs fwd;
  auto* fw = app.add_subcommand("forward", "Run the monolithic executor on a model");
  fw->add_option("--model", fwd.model)->required();
  fw->add_option("--input", fwd.input)->required();
  fw->add_option("--output", fwd.output)->required();
  fw->callback([&] { cmd_forward(fwd); });

  EstimateArgs est;
  auto* es = app.add_subcommand("estimate", "Latency and throughput estimates");
  es->add_option("--table", est.table, "seq,X,T,I cycle CSV (default: shipped dataset)");
  es->add_option("--trace", est.report, "X/T/I report written by 'run --report'");
  es->add_option("--target", est.target, "ultrascale or versal")->capture_default_str();
  es->add_option("--preset", est.preset, "Model shape for --target versal")->capture_default_str();
  es->add_option("--L", est.layers, "Encoder count")->capture_default_str();
  es->add_option("--d", est.d, "Switch latency in seconds (default 1.1e-6 or the report's)");
  es->add_option("--f", est.f, "Clock frequency in Hz (default 200e6 or the report's)");
  es->add_option("--seq", est.seq, "Sequence length of the --trace run");
  es->add_option("--interpolate", est.interpolate, "Estimate one interpolated sequence length");
  es->add_option("--csv", est.csv, "Write the CSV report here");
  es->callback([&] { cmd_estimate(est); });

  int64_t rc_clusters = 12, rc_kernels = 0;
  auto* rc = app.add_subcommand("routing", "Per-node routing state: gateway scheme vs full mesh");
  rc->add_option("--clusters", rc_clusters)->capture_default_str();
  rc->add_option("--kernels", rc_kernels, "Kernels per cluster (default: = clusters)");
  rc->callback([&] {
    int64_t g = 0, m = 0;
    const int64_t k = rc_kernels > 0 ? rc_kernels : rc_clusters;
    check(gsim_routing_bound(static_cast<int>(rc_clusters), static_cast<int>(k), &g, &m));
    std::cout << "clusters = " << rc_clusters << "\nkernels_per_cluster = " << k
              << "\ngateway = " << g << "\nfull_mesh = " << m << "\n";
  });

  VerifyArgs ver;
  auto* ve = app.add_subcommand("verify", "Bit-exact checks against the scalar oracles");
  ve->add_option("--plan", ver.plan, "Check every module of this plan's model and the plan");
  ve->add_option("--rows", ver.rows, "Input rows for --plan")->capture_default_str();
  ve->add_option("--kernel", ver.kernel, "Suite kernel name or 'all'")->capture_default_str();
  ve->add_option("--instances", ver.instances, "Desk-scale instances")->capture_default_str();
  ve->add_option("--full", ver.full, "Full-size instances")->capture_default_str();
  ve->add_option("--seed", ver.seed)->capture_default_str();
  ve->add_option("--csv", ver.csv, "Write the CSV report here");
  ve->callback([&] { status = cmd_verify(ver); });

  TensorArgs ten;
  auto* te = app.add_subcommand("tensor", "Tensor blob utilities");
  te->require_subcommand(1);
  auto* tr = te->add_subcommand("random", "Write a random INT8 tensor");
  tr->add_option("--rows", ten.rows)->required();
  tr->add_option("--cols", ten.cols)->required();
  tr->add_option("--seed", ten.seed)->capture_default_str();
  tr->add_option("--out", ten.out)->required();
  tr->callback([&] { cmd_tensor_random(ten); });
  auto* tc = te->add_subcommand("compare", "Exit 0 when two blobs hold the same values");
  tc->add_option("a", ten.a)->required();
  tc->add_option("b", ten.b)->required();
  tc->callback([&] { status = cmd_tensor_compare(ten); });
  auto* ts = te->add_subcommand("show", "Print a tensor blob");
  ts->add_option("file", ten.a)->required();
  ts->callback([&] { cmd_tensor_show(ten); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : GSIM_ERR_VALIDATION;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.status;
  }
  return status;
}
