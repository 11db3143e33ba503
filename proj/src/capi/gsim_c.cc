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

#include "gsim/gsim.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "builder/build.h"
#include "builder/deploy.h"
#include "builder/description.h"
#include "builder/model_fs.h"
#include "builder/synth.h"
#include "common/error.h"
#include "common/io.h"
#include "ibert/encoder.h"
#include "ibert/tensor_io.h"
#include "perfmodel/model.h"
#include "reference/suite.h"
#include "runtime/measure.h"
#include "runtime/trace.h"

struct gsim_plan {
  gsim::builder::ClusterPlan plan;
};
struct gsim_tensor {
  gsim::ibert::QuantTensor tensor;
};
struct gsim_run {
  gsim::builder::PlanRun run;
};

namespace {

using namespace gsim;

thread_local std::string g_last_error;

gsim_status fail(gsim_status s, const std::string& message) {
  g_last_error = message;
  return s;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
gsim_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return GSIM_OK;
  } catch (const Error& e) {
    return fail(static_cast<gsim_status>(e.category()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(GSIM_ERR_IO, std::string("i/o error: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(GSIM_ERR_SIMULATION, "resource fault: out of memory");
  } catch (const std::exception& e) {
    return fail(GSIM_ERR_VALIDATION, std::string("internal error: ") + e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw validation_error("invalid argument", what);
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void put(char** out, const std::string& s) {
  if (out != nullptr) *out = dup(s);
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

ibert::QuantTensor with_input_scale(ibert::QuantTensor t) {
  t.scale = builder::kModelInputScale;
  return t;
}

}  // namespace

extern "C" {

const char* gsim_version(void) { return "1.0.0"; }

const char* gsim_last_error(void) { return g_last_error.c_str(); }

void gsim_string_free(char* s) { std::free(s); }

gsim_status gsim_preset_names(char** out) {
  return guard([&] {
    require(out != nullptr, "out is NULL");
    std::string s;
    for (const auto& n : builder::preset_names()) s += (s.empty() ? "" : ",") + n;
    *out = dup(s);
  });
}

gsim_status gsim_synth_model(const char* preset, int layers, uint64_t seed,
                             const char* archive_path, const char* model_dir) {
  return guard([&] {
    require(preset != nullptr, "preset is NULL");
    require(archive_path != nullptr || model_dir != nullptr, "no output requested");
    const builder::Preset p = builder::named_preset(preset, layers, 0);
    const builder::Model model{p.cfg, builder::synthesize_model(p.cfg, seed)};
    if (archive_path != nullptr) builder::write_archive(archive_path, model);
    if (model_dir != nullptr) builder::write_model_fs(model_dir, model);
  });
}

gsim_status gsim_import_archive(const char* archive_path, const char* model_dir) {
  return guard([&] {
    require(archive_path != nullptr && model_dir != nullptr, "path is NULL");
    builder::import_model(archive_path, model_dir);
  });
}

gsim_status gsim_write_descriptions(const char* preset, int layers, int nodes_per_cluster,
                                    const char* dir) {
  return guard([&] {
    require(preset != nullptr && dir != nullptr, "argument is NULL");
    const builder::Preset p = builder::named_preset(preset, layers, nodes_per_cluster);
    const std::filesystem::path d(dir);
    std::filesystem::create_directories(d);
    write_text(d / "layers.json", builder::dump_layer_description(p.layers));
    write_text(d / "clusters.json", builder::dump_cluster_description(p.clusters));
  });
}

gsim_status gsim_plan_build(const char* layer_desc_path, const char* cluster_desc_path,
                            const char* model_dir, gsim_plan** out) {
  return guard([&] {
    require(layer_desc_path && cluster_desc_path && model_dir && out, "argument is NULL");
    *out = nullptr;
    const auto layers = builder::parse_layer_description(read_text(layer_desc_path));
    const auto clusters = builder::parse_cluster_description(read_text(cluster_desc_path));
    auto plan = std::make_unique<gsim_plan>();
    plan->plan = builder::build(layers, clusters, std::filesystem::absolute(model_dir));
    *out = plan.release();
  });
}

gsim_status gsim_plan_load(const char* path, gsim_plan** out) {
  return guard([&] {
    require(path && out, "argument is NULL");
    *out = nullptr;
    auto plan = std::make_unique<gsim_plan>();
    plan->plan = builder::parse_plan(read_text(path));
    *out = plan.release();
  });
}

gsim_status gsim_plan_save(const gsim_plan* plan, const char* path) {
  return guard([&] {
    require(plan && path, "argument is NULL");
    write_text(path, builder::dump_plan(plan->plan));
  });
}

void gsim_plan_free(gsim_plan* plan) { delete plan; }

gsim_status gsim_plan_validate(const gsim_plan* plan, char** report) {
  return guard([&] {
    require(plan && report, "argument is NULL");
    *report = dup(join_lines(builder::validate(plan->plan)));
  });
}

gsim_status gsim_plan_summary(const gsim_plan* plan, char** out) {
  return guard([&] {
    require(plan && out, "argument is NULL");
    const builder::ClusterPlan& p = plan->plan;
    KeyValues kv;
    kv["clusters"] = std::to_string(p.clusters.size());
    kv["nodes_per_cluster"] = std::to_string(p.nodes_per_cluster);
    kv["max_stored_addresses"] = std::to_string(p.max_stored_addresses());
    size_t max_kernels = 0;
    for (const auto& c : p.clusters) max_kernels = std::max(max_kernels, c.kernels.size());
    // Own kernels plus one gateway entry per other cluster, against a flat
    // table naming every kernel of every cluster.
    kv["routing_bound"] = std::to_string(max_kernels + p.clusters.size() - 1);
    kv["routing_full_mesh"] = std::to_string(max_kernels * p.clusters.size());
    kv["model_fs"] = p.model_fs;
    for (const builder::PlanCluster& c : p.clusters) {
      size_t gmi = 0;
      for (const auto& k : c.kernels) gmi += k.kind == "gmi";
      const std::string pre = "cluster_" + std::to_string(c.id) + ".";
      kv[pre + "kernels"] = std::to_string(c.kernels.size());
      kv[pre + "kernel_ids"] = std::to_string(c.kernels.size() + c.virtuals.size());
      kv[pre + "gmi_kernels"] = std::to_string(gmi);
      kv[pre + "virtual_kernels"] = std::to_string(c.virtuals.size());
    }
    *out = dup(render_key_values(kv));
  });
}

gsim_status gsim_plan_emit_skeleton(const gsim_plan* plan, const char* dir,
                                    size_t* files_written) {
  return guard([&] {
    require(plan && dir, "argument is NULL");
    const auto files = builder::emit_skeleton(plan->plan, dir);
    if (files_written != nullptr) *files_written = files.size();
  });
}

gsim_status gsim_plan_input_shape(const gsim_plan* plan, int* max_rows, int* cols) {
  return guard([&] {
    require(plan && max_rows && cols, "argument is NULL");
    *max_rows = plan->plan.cfg.max_seq;
    *cols = plan->plan.cfg.hidden;
  });
}

gsim_status gsim_tensor_random(int rows, int cols, uint64_t seed, gsim_tensor** out) {
  return guard([&] {
    require(out != nullptr, "out is NULL");
    require(rows > 0 && cols > 0, "tensor shape must be positive");
    *out = new gsim_tensor{ibert::random_tensor(rows, cols, seed, builder::kModelInputScale)};
  });
}

gsim_status gsim_tensor_load(const char* path, gsim_tensor** out) {
  return guard([&] {
    require(path && out, "argument is NULL");
    *out = nullptr;
    *out = new gsim_tensor{with_input_scale(ibert::read_tensor(path))};
  });
}

gsim_status gsim_tensor_save(const gsim_tensor* t, const char* path) {
  return guard([&] {
    require(t && path, "argument is NULL");
    ibert::write_tensor(path, t->tensor);
  });
}

gsim_status gsim_tensor_shape(const gsim_tensor* t, int* rows, int* cols) {
  return guard([&] {
    require(t && rows && cols, "argument is NULL");
    *rows = t->tensor.rows;
    *cols = t->tensor.cols;
  });
}

gsim_status gsim_tensor_copy(const gsim_tensor* t, int8_t* data, size_t len) {
  return guard([&] {
    require(t && data, "argument is NULL");
    require(len >= t->tensor.data.size(), "buffer too small");
    std::memcpy(data, t->tensor.data.data(), t->tensor.data.size());
  });
}

gsim_status gsim_tensor_equal(const gsim_tensor* a, const gsim_tensor* b, int* equal) {
  return guard([&] {
    require(a && b && equal, "argument is NULL");
    *equal = a->tensor.rows == b->tensor.rows && a->tensor.cols == b->tensor.cols &&
             a->tensor.data == b->tensor.data;
  });
}

void gsim_tensor_free(gsim_tensor* t) { delete t; }

void gsim_run_options_init(gsim_run_options* o) {
  if (o == nullptr) return;
  o->start_cycle = 0;
  o->interval = 0;
  o->cycle_budget = 0;
  o->loss_probability = -1;
  o->seed = -1;
}

gsim_status gsim_run_plan(const gsim_plan* plan, const gsim_tensor* input,
                          const gsim_run_options* options, gsim_run** out) {
  return guard([&] {
    require(plan && input && out, "argument is NULL");
    *out = nullptr;
    builder::RunOptions o;
    if (options != nullptr) {
      o.start = options->start_cycle;
      o.interval = options->interval;
      if (options->cycle_budget > 0) o.cycle_budget = options->cycle_budget;
      if (options->loss_probability >= 0) o.loss_probability = options->loss_probability;
      if (options->seed >= 0) o.seed = static_cast<uint64_t>(options->seed);
    }
    auto run = std::make_unique<gsim_run>();
    run->run = builder::run_plan(plan->plan, with_input_scale(input->tensor), o);
    *out = run.release();
  });
}

gsim_status gsim_run_complete(const gsim_run* run, int* complete) {
  return guard([&] {
    require(run && complete, "argument is NULL");
    *complete = run->run.complete;
  });
}

gsim_status gsim_run_output(const gsim_run* run, gsim_tensor** out) {
  return guard([&] {
    require(run && out, "argument is NULL");
    *out = nullptr;
    if (!run->run.complete) {
      throw simulation_error("incomplete run", "the run did not deliver every output row");
    }
    *out = new gsim_tensor{run->run.output};
  });
}

gsim_status gsim_run_write_trace(const gsim_run* run, const char* path) {
  return guard([&] {
    require(run && path, "argument is NULL");
    runtime::write_trace(path, run->run.trace);
  });
}

gsim_status gsim_run_report(const gsim_run* run, char** out) {
  return guard([&] {
    require(run && out, "argument is NULL");
    *out = dup(runtime::format_report(run->run.xti));
  });
}

gsim_status gsim_run_components(const gsim_run* run, uint64_t* x, uint64_t* t, uint64_t* i) {
  return guard([&] {
    require(run != nullptr, "run is NULL");
    if (x) *x = run->run.xti.x;
    if (t) *t = run->run.xti.t;
    if (i) *i = run->run.xti.i;
  });
}

void gsim_run_free(gsim_run* run) { delete run; }

gsim_status gsim_model_forward(const char* model_dir, const gsim_tensor* input,
                               gsim_tensor** out) {
  return guard([&] {
    require(model_dir && input && out, "argument is NULL");
    *out = nullptr;
    const builder::Model m = builder::read_model_fs(model_dir);
    ibert::QuantTensor x = input->tensor;
    x.scale = m.layers.at(0).in_scale;
    *out = new gsim_tensor{ibert::model_forward(x, m.layers, m.cfg)};
  });
}

gsim_status gsim_estimate_table(const char* csv_path, int layers, double d_seconds, double f_hz,
                                char** text, char** csv) {
  return guard([&] {
    require(csv_path != nullptr, "csv_path is NULL");
    const auto table = perfmodel::parse_cycle_table(read_text(csv_path));
    const auto rows = perfmodel::latency_table(table, layers, d_seconds, f_hz);
    put(text, perfmodel::latency_text(rows));
    put(csv, perfmodel::latency_csv(rows));
  });
}

gsim_status gsim_estimate_report(const char* report_path, int layers, double d_seconds,
                                 double f_hz, int seq, char** text, char** csv) {
  return guard([&] {
    require(report_path != nullptr, "report_path is NULL");
    runtime::LatencyComponents c = runtime::parse_report(read_text(report_path));
    if (d_seconds >= 0) c.d = d_seconds;
    if (f_hz > 0) c.f = f_hz;
    const perfmodel::CycleRow row{seq, double(c.x), double(c.t), double(c.i)};
    const auto rows = perfmodel::latency_table({row}, layers, c.d, c.f);
    put(text, perfmodel::latency_text(rows));
    put(csv, perfmodel::latency_csv(rows));
  });
}

gsim_status gsim_estimate_seq(const char* csv_path, double seq, int layers, double d_seconds,
                              double f_hz, double* latency_s, double* latency_no_switch_s,
                              double* throughput) {
  return guard([&] {
    require(csv_path != nullptr, "csv_path is NULL");
    const auto table = perfmodel::parse_cycle_table(read_text(csv_path));
    const perfmodel::CycleRow r = perfmodel::interpolate(table, seq);
    const perfmodel::PipelineModel m{layers, r.t, r.x, r.i, d_seconds, f_hz};
    if (latency_s) *latency_s = perfmodel::end_to_end_latency(m);
    if (latency_no_switch_s) *latency_no_switch_s = perfmodel::end_to_end_latency_no_switch(m);
    if (throughput) *throughput = perfmodel::throughput(m, static_cast<int>(std::lround(seq)));
  });
}

gsim_status gsim_estimate_versal(const char* preset, int layers, char** text, char** csv) {
  return guard([&] {
    require(preset != nullptr, "preset is NULL");
    const ibert::EncoderConfig cfg = builder::named_preset(preset, layers, 0).cfg;
    const auto e = perfmodel::versal_estimate(cfg, perfmodel::default_allocation(cfg));
    put(text, perfmodel::versal_text(e));
    put(csv, perfmodel::versal_csv(e));
  });
}

gsim_status gsim_routing_bound(int clusters, int kernels_per_cluster, int64_t* gateway,
                               int64_t* full_mesh) {
  return guard([&] {
    const auto b = perfmodel::routing_state_bound(clusters, kernels_per_cluster);
    if (gateway) *gateway = b.gateway;
    if (full_mesh) *full_mesh = b.full_mesh;
  });
}

gsim_status gsim_verify_kernels(const char* kernel, int desk_instances, int full_instances,
                                uint64_t seed, char** text, char** csv, int* all_pass) {
  return guard([&] {
    std::vector<std::string> names;
    if (kernel == nullptr || std::string(kernel) == "all") {
      names = reference::suite_kernels();
    } else {
      names = {kernel};
    }
    std::vector<reference::KernelCheck> checks;
    for (size_t k = 0; k < names.size(); ++k) {
      if (desk_instances > 0) {
        checks.push_back(reference::check_kernel(names[k], desk_instances, false, seed + 2 * k));
      }
      if (full_instances > 0) {
        checks.push_back(reference::check_kernel(names[k], full_instances, true, seed + 2 * k + 1));
      }
    }
    require(!checks.empty(), "no instances requested");
    bool pass = true;
    for (const auto& c : checks) pass = pass && c.pass();
    put(text, reference::checks_text(checks));
    put(csv, reference::checks_csv(checks));
    if (all_pass) *all_pass = pass;
  });
}

gsim_status gsim_verify_plan(const gsim_plan* plan, int rows, uint64_t seed, char** text,
                             char** csv, int* all_pass) {
  return guard([&] {
    require(plan != nullptr, "plan is NULL");
    const builder::Model m = builder::read_model_fs(plan->plan.model_fs);
    auto checks = reference::check_model(m, rows, seed);

    reference::KernelCheck d{"distributed", "plan", 1};
    const ibert::QuantTensor x =
        ibert::random_tensor(rows, m.cfg.hidden, seed ^ 0x9e3779b97f4a7c15ull, m.layers[0].in_scale);
    const builder::PlanRun run = builder::run_plan(plan->plan, x);
    const ibert::QuantTensor want = ibert::model_forward(x, m.layers, m.cfg);
    d.values = static_cast<int64_t>(want.data.size());
    if (!run.complete || run.output.data != want.data) d.mismatches = 1;
    checks.push_back(d);

    bool pass = true;
    for (const auto& c : checks) pass = pass && c.pass();
    put(text, reference::checks_text(checks));
    put(csv, reference::checks_csv(checks));
    if (all_pass) *all_pass = pass;
  });
}

}  // extern "C"
