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

#include "builder/plan.h"

#include <json.hpp>

#include "common/error.h"

namespace gsim::builder {

using nlohmann::json;

const PlanKernel* PlanCluster::find(int kernel) const {
  for (const PlanKernel& k : kernels) {
    if (k.id == kernel) return &k;
  }
  return nullptr;
}

const PlanKernel* ClusterPlan::find(int cluster, int kernel) const {
  for (const PlanCluster& c : clusters) {
    if (c.id == cluster) return c.find(kernel);
  }
  return nullptr;
}

size_t ClusterPlan::max_stored_addresses() const {
  size_t m = 0;
  for (const auto& [node, t] : routing) m = std::max(m, t.stored_addresses());
  return m;
}

namespace {

json address_json(const fabric::KernelAddress& a) { return {a.cluster, a.kernel}; }

fabric::KernelAddress address_of(const json& j) {
  return {j.at(0).get<uint8_t>(), j.at(1).get<uint8_t>()};
}

json route_json(const runtime::Route& r) {
  if (r.egress) return {{"egress", true}};
  json j = {{"cluster", r.cluster}, {"kernel", r.kernel}, {"port", r.port}};
  if (r.gmi >= 0) j["gmi"] = r.gmi;
  return j;
}

runtime::Route route_of(const json& j) {
  runtime::Route r;
  if (j.value("egress", false)) {
    r.egress = true;
    return r;
  }
  r.cluster = j.at("cluster").get<int>();
  r.kernel = j.at("kernel").get<int>();
  r.port = j.at("port").get<int>();
  r.gmi = j.value("gmi", -1);
  return r;
}

json gmi_json(const gmi::GmiKernelSpec& s) {
  json group = json::array();
  for (const auto& a : s.group) group.push_back(address_json(a));
  json j = {{"op", gmi::op_name(s.op)},
            {"group", group},
            {"placement", gmi::placement_name(s.placement)},
            {"chunk_bytes", s.chunk_bytes},
            {"reduce_fn", gmi::reduce_fn_name(s.reduce_fn)},
            {"elem", gmi::elem_name(s.elem)}};
  if (s.root) j["root"] = address_json(*s.root);
  return j;
}

gmi::GmiKernelSpec gmi_of(const json& j) {
  gmi::GmiKernelSpec s;
  s.op = gmi::parse_op(j.at("op").get<std::string>());
  for (const json& a : j.at("group")) s.group.push_back(address_of(a));
  s.placement = gmi::parse_placement(j.at("placement").get<std::string>());
  s.chunk_bytes = j.at("chunk_bytes").get<size_t>();
  s.reduce_fn = gmi::parse_reduce_fn(j.at("reduce_fn").get<std::string>());
  s.elem = gmi::parse_elem(j.at("elem").get<std::string>());
  if (j.contains("root")) s.root = address_of(j.at("root"));
  return s;
}

json kernel_json(const PlanKernel& k) {
  json inputs = json::array();
  for (const PlanInput& in : k.inputs) {
    inputs.push_back({{"capacity", in.capacity}, {"row_bytes", in.row_bytes}, {"from", in.from}});
  }
  json outputs = json::array();
  for (const auto& r : k.outputs) outputs.push_back(route_json(r));
  json j = {{"id", k.id},         {"label", k.label},     {"kind", k.kind},
            {"op", k.op},         {"node", k.node},       {"layer", k.layer},
            {"inputs", inputs},   {"outputs", outputs},   {"weight", k.weight}};
  if (!k.params.empty()) j["params"] = k.params;
  if (!k.aux.empty()) j["aux"] = k.aux;
  if (k.col_end > 0) j["columns"] = {k.col_begin, k.col_end};
  if (k.head >= 0) j["head"] = k.head;
  if (k.kind == "compute") {
    j["hw"] = {{"tiles", k.hw.tiles}, {"pes", k.hw.pes}, {"num_pe", k.hw.num_pe},
               {"lanes", k.hw.lanes}};
  }
  if (k.gmi) j["gmi"] = gmi_json(*k.gmi);
  if (!k.forwarding.empty()) j["forwarding"] = k.forwarding;
  return j;
}

PlanKernel kernel_of(const json& j) {
  PlanKernel k;
  k.id = j.at("id").get<int>();
  k.label = j.at("label").get<std::string>();
  k.kind = j.at("kind").get<std::string>();
  k.op = j.at("op").get<std::string>();
  k.node = j.at("node").get<fabric::NodeId>();
  k.layer = j.at("layer").get<std::string>();
  k.weight = j.at("weight").get<double>();
  for (const json& in : j.at("inputs")) {
    k.inputs.push_back({in.at("capacity").get<uint64_t>(), in.at("row_bytes").get<uint32_t>(),
                        in.at("from").get<std::string>()});
  }
  for (const json& r : j.at("outputs")) k.outputs.push_back(route_of(r));
  k.params = j.value("params", "");
  if (j.contains("aux")) k.aux = j.at("aux").get<std::vector<std::string>>();
  if (j.contains("columns")) {
    k.col_begin = j.at("columns").at(0).get<int>();
    k.col_end = j.at("columns").at(1).get<int>();
  }
  k.head = j.value("head", -1);
  if (j.contains("hw")) {
    const json& hw = j.at("hw");
    k.hw = {hw.at("tiles").get<int>(), hw.at("pes").get<int>(), hw.at("num_pe").get<int>(),
            hw.at("lanes").get<int>()};
  }
  if (j.contains("gmi")) k.gmi = gmi_of(j.at("gmi"));
  if (j.contains("forwarding")) {
    k.forwarding = j.at("forwarding").get<std::vector<std::pair<int, int>>>();
  }
  return k;
}

}  // namespace

std::string dump_plan(const ClusterPlan& p) {
  json clusters = json::array();
  for (const PlanCluster& c : p.clusters) {
    json kernels = json::array();
    for (const PlanKernel& k : c.kernels) kernels.push_back(kernel_json(k));
    json virtuals = json::array();
    for (const PlanVirtual& v : c.virtuals) {
      virtuals.push_back({{"id", v.id},
                          {"label", v.label},
                          {"op", gmi::op_name(v.op)},
                          {"ports", v.ports},
                          {"chunk_bytes", v.chunk_bytes}});
    }
    clusters.push_back({{"id", c.id},
                        {"kernel_ids",
                         {{"compute", c.compute_ids},
                          {"communication", c.communication_ids},
                          {"virtual", c.virtual_ids}}},
                        {"kernels", kernels},
                        {"virtuals", virtuals}});
  }
  json attachments = json::array();
  for (const auto& [node, sw] : p.topology.attachments) attachments.push_back({node, sw});
  json routing = json::array();
  for (const auto& [node, t] : p.routing) {
    routing.push_back({{"node", node},
                       {"cluster", t.cluster},
                       {"local", t.local},
                       {"gateways", t.gateways}});
  }
  const auto& cfg = p.cfg;
  const auto& h = p.host;
  json j = {
      {"format", "gsim-plan"},
      {"version", 1},
      {"model_fs", p.model_fs},
      {"encoder",
       {{"hidden", cfg.hidden},
        {"heads", cfg.heads},
        {"ffn", cfg.ffn},
        {"max_seq", cfg.max_seq},
        {"layers", cfg.layers}}},
      {"nodes_per_cluster", p.nodes_per_cluster},
      {"network",
       {{"switch_latency_s", p.network.switch_latency_s},
        {"clock_hz", p.network.clock_hz},
        {"link_bytes_per_cycle", p.network.link_bytes_per_cycle},
        {"loss_probability", p.network.loss_probability},
        {"seed", p.network.seed}}},
      {"topology",
       {{"switches", p.topology.switches},
        {"links", p.topology.links},
        {"attachments", attachments}}},
      {"routing", routing},
      {"host",
       {{"input_cluster", h.input_cluster},
        {"input_gmi", h.input_gmi},
        {"input_row_bytes", h.input_row_bytes},
        {"ingress", h.ingress},
        {"egress", h.egress},
        {"output_cluster", h.output_cluster},
        {"output_kernel", h.output_kernel},
        {"output_row_bytes", h.output_row_bytes},
        {"output_params", h.output_params}}},
      {"clusters", clusters}};
  return j.dump(1) + "\n";
}

ClusterPlan parse_plan(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw validation_error("parse error", std::string("plan: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "gsim-plan" || j.value("version", 0) != 1) {
    throw validation_error("unsupported format", "expected a version 1 'gsim-plan' document");
  }
  ClusterPlan p;
  try {
    p.model_fs = j.at("model_fs").get<std::string>();
    const json& e = j.at("encoder");
    p.cfg.hidden = e.at("hidden").get<int>();
    p.cfg.heads = e.at("heads").get<int>();
    p.cfg.ffn = e.at("ffn").get<int>();
    p.cfg.max_seq = e.at("max_seq").get<int>();
    p.cfg.layers = e.at("layers").get<int>();
    p.nodes_per_cluster = j.at("nodes_per_cluster").get<int>();
    const json& n = j.at("network");
    p.network.switch_latency_s = n.at("switch_latency_s").get<double>();
    p.network.clock_hz = n.at("clock_hz").get<double>();
    p.network.link_bytes_per_cycle = n.at("link_bytes_per_cycle").get<uint32_t>();
    p.network.loss_probability = n.at("loss_probability").get<double>();
    p.network.seed = n.at("seed").get<uint64_t>();
    const json& t = j.at("topology");
    p.topology.switches = t.at("switches").get<std::vector<std::string>>();
    p.topology.links = t.at("links").get<std::vector<std::pair<std::string, std::string>>>();
    for (const json& a : t.at("attachments")) {
      p.topology.attachments[a.at(0).get<fabric::NodeId>()] = a.at(1).get<std::string>();
    }
    for (const json& r : j.at("routing")) {
      fabric::RoutingTables tables;
      tables.cluster = r.at("cluster").get<uint8_t>();
      tables.local = r.at("local").get<std::map<uint8_t, fabric::NodeId>>();
      tables.gateways = r.at("gateways").get<std::map<uint8_t, fabric::NodeId>>();
      p.routing[r.at("node").get<fabric::NodeId>()] = std::move(tables);
    }
    const json& h = j.at("host");
    p.host.input_cluster = h.at("input_cluster").get<int>();
    p.host.input_gmi = h.at("input_gmi").get<int>();
    p.host.input_row_bytes = h.at("input_row_bytes").get<uint32_t>();
    p.host.ingress = h.at("ingress").get<fabric::NodeId>();
    p.host.egress = h.at("egress").get<fabric::NodeId>();
    p.host.output_cluster = h.at("output_cluster").get<int>();
    p.host.output_kernel = h.at("output_kernel").get<int>();
    p.host.output_row_bytes = h.at("output_row_bytes").get<uint32_t>();
    p.host.output_params = h.at("output_params").get<std::string>();
    for (const json& c : j.at("clusters")) {
      PlanCluster pc;
      pc.id = c.at("id").get<int>();
      const json& ids = c.at("kernel_ids");
      pc.compute_ids = ids.at("compute").get<std::vector<int>>();
      pc.communication_ids = ids.at("communication").get<std::vector<int>>();
      pc.virtual_ids = ids.at("virtual").get<std::vector<int>>();
      for (const json& k : c.at("kernels")) pc.kernels.push_back(kernel_of(k));
      for (const json& v : c.at("virtuals")) {
        PlanVirtual pv;
        pv.id = v.at("id").get<int>();
        pv.label = v.at("label").get<std::string>();
        pv.op = gmi::parse_op(v.at("op").get<std::string>());
        pv.ports = v.at("ports").get<std::vector<int>>();
        pv.chunk_bytes = v.at("chunk_bytes").get<size_t>();
        pc.virtuals.push_back(std::move(pv));
      }
      p.clusters.push_back(std::move(pc));
    }
  } catch (const json::exception& e) {
    throw validation_error("malformed field", std::string("plan: ") + e.what());
  }
  return p;
}

}  // namespace gsim::builder
