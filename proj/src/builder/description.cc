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

#include "builder/description.h"

#include <cmath>
#include <json.hpp>

#include "common/error.h"

namespace gsim::builder {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw validation_error("parse error", std::string(what) + ": " + e.what());
  }
}

void check_format(const json& j, const char* format) {
  if (!j.is_object() || j.value("format", "") != format || j.value("version", 0) != 1) {
    throw validation_error("unsupported format",
                           std::string("expected a version 1 '") + format + "' document");
  }
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw validation_error("missing field", where + ": no '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw validation_error("malformed field", where + ": '" + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? field<T>(j, key, where) : fallback;
}

}  // namespace

LayerDescription parse_layer_description(const std::string& text) {
  json j = parse_json(text, "layer description");
  check_format(j, "gsim-layers");
  LayerDescription d;
  const json& layers = j.contains("layers") ? j.at("layers") : json();
  if (!layers.is_array()) throw validation_error("missing field", "layer description: no 'layers' array");
  for (size_t i = 0; i < layers.size(); ++i) {
    const json& l = layers[i];
    std::string where = "layer " + std::to_string(i);
    LayerSpec s;
    s.name = field<std::string>(l, "name", where);
    where = "layer '" + s.name + "'";
    s.module = field<std::string>(l, "module", where);
    s.params = field_or<std::string>(l, "params", "", where);
    s.inputs = field_or<std::vector<std::string>>(l, "inputs", {}, where);
    if (l.contains("hw")) {
      const json& hw = l.at("hw");
      s.hw.tiles = field_or<int>(hw, "tiles", 1, where);
      s.hw.pes = field_or<int>(hw, "pes", 1, where);
      s.hw.num_pe = field_or<int>(hw, "num_pe", 12, where);
      s.hw.lanes = field_or<int>(hw, "lanes", 0, where);
      s.column_partitions = field_or<int>(hw, "column_partitions", 1, where);
    }
    if (l.contains("weight")) s.weight = field<double>(l, "weight", where);
    d.layers.push_back(std::move(s));
  }
  return d;
}

std::string dump_layer_description(const LayerDescription& d) {
  json layers = json::array();
  for (const LayerSpec& s : d.layers) {
    json l = {{"name", s.name}, {"module", s.module}};
    if (!s.params.empty()) l["params"] = s.params;
    if (!s.inputs.empty()) l["inputs"] = s.inputs;
    if (s.module != "source" && s.module != "sink") {
      l["hw"] = {{"tiles", s.hw.tiles},   {"pes", s.hw.pes},
                 {"num_pe", s.hw.num_pe}, {"lanes", s.hw.lanes},
                 {"column_partitions", s.column_partitions}};
    }
    if (s.weight) l["weight"] = *s.weight;
    layers.push_back(std::move(l));
  }
  json j = {{"format", "gsim-layers"}, {"version", 1}, {"layers", layers}};
  return j.dump(2) + "\n";
}

ClusterDescription parse_cluster_description(const std::string& text) {
  json j = parse_json(text, "cluster description");
  check_format(j, "gsim-clusters");
  const std::string where = "cluster description";
  ClusterDescription d;
  d.clusters = field<int>(j, "clusters", where);
  if (j.contains("assignment")) {
    for (const json& a : j.at("assignment")) {
      Assignment as;
      as.cluster = field<int>(a, "cluster", where + " assignment");
      as.layers = field<std::vector<std::string>>(a, "layers", where + " assignment");
      d.assignment.push_back(std::move(as));
    }
  }
  d.nodes_per_cluster = field_or<int>(j, "nodes_per_cluster", 1, where);
  d.placement = field_or<std::map<std::string, int>>(j, "placement", {}, where);
  d.gmi_placement = field_or<std::string>(j, "gmi_placement", "auto", where);
  if (j.contains("network")) {
    const json& n = j.at("network");
    const std::string nw = where + " network";
    d.network.switch_latency_s = field_or<double>(n, "switch_latency_us", 1.1, nw) * 1e-6;
    d.network.clock_hz = field_or<double>(n, "clock_mhz", 200.0, nw) * 1e6;
    d.network.link_bytes_per_cycle = field_or<uint32_t>(n, "link_bytes_per_cycle", 64, nw);
    d.network.loss_probability = field_or<double>(n, "loss_probability", 0.0, nw);
    d.network.seed = field_or<uint64_t>(n, "seed", 1, nw);
  }
  return d;
}

std::string dump_cluster_description(const ClusterDescription& d) {
  json assignment = json::array();
  for (const Assignment& a : d.assignment) {
    assignment.push_back({{"cluster", a.cluster}, {"layers", a.layers}});
  }
  json j = {{"format", "gsim-clusters"},
            {"version", 1},
            {"clusters", d.clusters},
            {"assignment", assignment},
            {"nodes_per_cluster", d.nodes_per_cluster},
            {"placement", d.placement},
            {"gmi_placement", d.gmi_placement},
            {"network",
             {{"switch_latency_us", d.network.switch_latency_s * 1e6},
              {"clock_mhz", d.network.clock_hz / 1e6},
              {"link_bytes_per_cycle", d.network.link_bytes_per_cycle},
              {"loss_probability", d.network.loss_probability},
              {"seed", d.network.seed}}}};
  return j.dump(2) + "\n";
}

namespace {

ibert::KernelHw linear_hw(int macs) {
  ibert::KernelHw hw;
  hw.pes = macs % 48 == 0 ? 48 : macs;
  hw.tiles = macs / hw.pes;
  return hw;
}

}  // namespace

Preset ibert_preset(const ibert::EncoderConfig& cfg, int macs_per_cycle, int nodes_per_cluster) {
  cfg.check();
  Preset p;
  p.cfg = cfg;
  const int ffn_macs = static_cast<int>(int64_t(macs_per_cycle) * cfg.ffn / cfg.hidden);
  auto& layers = p.layers.layers;
  layers.push_back({"input", "source", "", {}, {}, 1, std::nullopt});
  std::string x = "input";
  for (int l = 0; l < cfg.layers; ++l) {
    const std::string e = "encoder_" + std::to_string(l);
    auto add = [&](const std::string& role, const std::string& module,
                   std::vector<std::string> inputs, ibert::KernelHw hw) {
      LayerSpec s;
      s.name = e + "." + role;
      s.module = module;
      s.params = e + "/" + role;
      s.inputs = std::move(inputs);
      s.hw = hw;
      layers.push_back(std::move(s));
    };
    auto in = [&](const char* role) { return e + "." + role; };
    add("q", "linear_quant", {x}, linear_hw(macs_per_cycle));
    add("k", "linear_quant", {x}, linear_hw(macs_per_cycle));
    add("v", "linear_quant", {x}, linear_hw(macs_per_cycle));
    add("attention", "attention", {in("q"), in("k"), in("v")}, {});
    add("attn_out", "linear_quant", {in("attention")}, linear_hw(macs_per_cycle));
    add("ln1", "layernorm", {in("attn_out"), x}, {});
    add("ffn1", "linear_gelu", {in("ln1")}, linear_hw(ffn_macs));
    add("ffn2", "linear_quant", {in("ffn1")}, linear_hw(ffn_macs));
    add("ln2", "layernorm", {in("ffn2"), in("ln1")}, {});
    x = e + ".ln2";
    p.clusters.assignment.push_back({l, {e + ".*"}});
  }
  layers.push_back({"output", "sink", "", {x}, {}, 1, std::nullopt});
  p.clusters.clusters = cfg.layers;
  p.clusters.nodes_per_cluster = nodes_per_cluster;
  if (nodes_per_cluster == 6) {
    p.clusters.placement = {{"gateway", 0},          {"q", 0},      {"k", 0},  {"v", 0},
                            {"attention/scores", 1}, {"attention/context", 2},
                            {"attn_out", 3},         {"ln1", 3},    {"ffn1", 4},
                            {"ffn2", 5},             {"ln2", 5}};
  }
  return p;
}

Preset named_preset(const std::string& name, int layers, int nodes_per_cluster) {
  ibert::EncoderConfig cfg;
  int macs = 768;
  int nodes = 6;
  if (name == "tiny") {
    cfg.hidden = 8;
    cfg.heads = 2;
    cfg.ffn = 32;
    cfg.max_seq = 16;
    cfg.layers = 3;
    macs = 4;
  } else if (name != "ibert-base") {
    throw validation_error("unknown preset", "'" + name + "' (known: ibert-base, tiny)");
  }
  if (layers > 0) cfg.layers = layers;
  if (nodes_per_cluster > 0) nodes = nodes_per_cluster;
  return ibert_preset(cfg, macs, nodes);
}

Preset named_preset(const std::string& name) { return named_preset(name, 0, 0); }

std::vector<std::string> preset_names() { return {"ibert-base", "tiny"}; }

}  // namespace gsim::builder
