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

#include "builder/deploy.h"

#include <map>
#include <memory>

#include "common/error.h"
#include "gmi/kernels.h"
#include "ibert/stream.h"

namespace gsim::builder {

namespace {

class ParamCache {
 public:
  explicit ParamCache(const FileSource& src) : src_(src) {}

  std::shared_ptr<const ibert::LinearParams> linear(const std::string& module) {
    auto& p = linear_[module];
    if (!p) p = std::make_shared<const ibert::LinearParams>(read_linear(src_, module));
    return p;
  }
  const ModuleInfo& info(const std::string& module) {
    auto it = info_.find(module);
    if (it == info_.end()) it = info_.emplace(module, read_module_info(src_, module)).first;
    return it->second;
  }
  const FileSource& source() const { return src_; }

 private:
  const FileSource& src_;
  std::map<std::string, std::shared_ptr<const ibert::LinearParams>> linear_;
  std::map<std::string, ModuleInfo> info_;
};

std::unique_ptr<runtime::KernelBehavior> behavior(const PlanCluster& c, const PlanKernel& k,
                                                  ParamCache& cache) {
  const int outputs = static_cast<int>(k.outputs.size());
  if (k.op == "gateway") {
    std::map<uint8_t, int> forwarding;
    for (auto [byte, port] : k.forwarding) forwarding[uint8_t(byte)] = port;
    std::map<uint8_t, gmi::GatewayKernel::Virtual> virtuals;
    for (const PlanVirtual& v : c.virtuals) virtuals[uint8_t(v.id)] = {v.op, v.ports, v.chunk_bytes};
    return std::make_unique<gmi::GatewayKernel>(std::move(forwarding), std::move(virtuals));
  }
  if (k.op == "linear_quant" || k.op == "linear_gelu") {
    return std::make_unique<ibert::LinearKernel>(cache.linear(k.params), k.col_begin, k.col_end,
                                                 k.op == "linear_gelu", k.hw, outputs);
  }
  if (k.op == "layernorm") {
    return std::make_unique<ibert::LayerNormKernel>(read_layernorm(cache.source(), k.params),
                                                    outputs);
  }
  if (k.op == "attention_scores" || k.op == "softmax_matmul") {
    if (outputs != 1) {
      throw validation_error("invalid plan", k.label + " must have exactly one output");
    }
    const ModuleInfo& a = cache.info(k.params);
    const int dh = a.out_dim / a.heads;
    if (k.op == "attention_scores") {
      return std::make_unique<ibert::ScoresKernel>(dh, cache.info(k.aux.at(0)).out_scale,
                                                   cache.info(k.aux.at(1)).out_scale, k.hw);
    }
    return std::make_unique<ibert::ContextKernel>(dh, cache.info(k.aux.at(0)).out_scale,
                                                  a.out_scale, k.hw);
  }
  if (!k.gmi) throw validation_error("invalid plan", k.label + ": unknown op '" + k.op + "'");
  switch (k.gmi->op) {
    case gmi::GmiOp::kBroadcast:
      return std::make_unique<gmi::BroadcastKernel>(k.outputs.size());
    case gmi::GmiOp::kScatter:
      return std::make_unique<gmi::ScatterKernel>(k.outputs.size(), k.gmi->chunk_bytes);
    case gmi::GmiOp::kGather: {
      std::vector<std::string> names;
      for (const PlanInput& in : k.inputs) names.push_back(in.from);
      return std::make_unique<gmi::GatherKernel>(std::move(names));
    }
    case gmi::GmiOp::kReduce:
      return std::make_unique<gmi::ReduceKernel>(k.inputs.size(), k.gmi->reduce_fn, k.gmi->elem);
  }
  throw validation_error("invalid plan", k.label + ": unknown GMI op");
}

}  // namespace

std::unique_ptr<runtime::Simulator> instantiate(const ClusterPlan& plan,
                                                const FileSource& source,
                                                const RunOptions& options) {
  runtime::SimConfig cfg;
  cfg.topology = plan.topology;
  cfg.network = plan.network;
  if (options.loss_probability) cfg.network.loss_probability = *options.loss_probability;
  if (options.seed) cfg.network.seed = *options.seed;
  cfg.tables = plan.routing;
  cfg.host_ingress = plan.host.ingress;
  cfg.host_egress = plan.host.egress;
  cfg.cycle_budget = options.cycle_budget;
  auto sim = std::make_unique<runtime::Simulator>(std::move(cfg));
  ParamCache cache(source);
  for (const PlanCluster& c : plan.clusters) {
    for (const PlanKernel& k : c.kernels) {
      runtime::KernelSpec spec;
      spec.addr = {uint8_t(c.id), uint8_t(k.id)};
      spec.node = k.node;
      for (const PlanInput& in : k.inputs) spec.input_capacity.push_back(in.capacity);
      spec.outputs = k.outputs;
      spec.behavior = behavior(c, k, cache);
      sim->add_kernel(std::move(spec));
    }
  }
  return sim;
}

PlanRun run_plan(const ClusterPlan& plan, const FileSource& source,
                 const ibert::QuantTensor& input, const RunOptions& options) {
  if (input.rows < 1 || input.rows > plan.cfg.max_seq) {
    throw validation_error("shape mismatch", "sequence length " + std::to_string(input.rows) +
                                                 " outside 1.." +
                                                 std::to_string(plan.cfg.max_seq));
  }
  if (static_cast<uint32_t>(input.cols) != plan.host.input_row_bytes) {
    throw validation_error("shape mismatch", "input rows are " + std::to_string(input.cols) +
                                                 " bytes, the plan expects " +
                                                 std::to_string(plan.host.input_row_bytes));
  }
  auto sim = instantiate(plan, source, options);
  std::vector<std::vector<uint8_t>> rows;
  for (int r = 0; r < input.rows; ++r) rows.push_back(ibert::row_bytes(input, r));
  const uint64_t interval =
      options.interval ? options.interval
                       : (plan.host.input_row_bytes + fabric::kFlitBytes - 1) / fabric::kFlitBytes;
  runtime::RunResult rr = sim->run(runtime::make_stimulus(rows, options.start, interval,
                                                          plan.host.input_cluster,
                                                          plan.host.input_gmi));
  PlanRun out;
  out.drops = rr.drops;
  out.complete = !rr.trace.incomplete && rr.egress.size() == rows.size();
  const double scale = read_module_info(source, plan.host.output_params).out_scale;
  if (out.complete) {
    out.output = ibert::tensor_from_rows(rr.egress, static_cast<int>(plan.host.output_row_bytes),
                                         scale);
  }
  try {
    out.xti = runtime::measure_xti(rr.trace,
                                   {plan.host.output_cluster, plan.host.output_kernel},
                                   runtime::first_injection(rr.trace));
  } catch (const Error&) {
    if (out.complete) throw;
  }
  out.xti.f = plan.network.clock_hz;
  out.xti.d = plan.network.switch_latency_s;
  out.trace = std::move(rr.trace);
  return out;
}

PlanRun run_plan(const ClusterPlan& plan, const ibert::QuantTensor& input,
                 const RunOptions& options) {
  return run_plan(plan, directory_source(plan.model_fs), input, options);
}

}  // namespace gsim::builder
