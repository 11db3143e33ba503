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

#ifndef GSIM_BUILDER_DESCRIPTION_H_
#define GSIM_BUILDER_DESCRIPTION_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fabric/network.h"
#include "ibert/encoder.h"
#include "ibert/stream.h"

namespace gsim::builder {

// Layer Description File, `gsim-layers` version 1:
//   {"format": "gsim-layers", "version": 1, "layers": [
//     {"name": "encoder_0.q", "module": "linear_quant", "params": "encoder_0/q",
//      "inputs": ["input"], "hw": {"tiles": 16, "pes": 48, "column_partitions": 1},
//      "weight": 589824}, ...]}
// Modules and their ordered inputs:
//   source        none; the host feeds it
//   linear_quant  [x]                 Linear + Quant
//   linear_gelu   [x]                 Linear + GELU
//   attention     [q, k, v]           per head: dot product + softmax, then
//                                     softmax matmul + Quant
//   layernorm     [main, residual]    residual add + LayerNorm
//   sink          [x]; the host collects it
// "params" names a module directory of the model file system. "weight" is
// an optional resource weight for automatic node mapping.
struct LayerSpec {
  std::string name;
  std::string module;
  std::string params;
  std::vector<std::string> inputs;
  ibert::KernelHw hw;
  int column_partitions = 1;
  std::optional<double> weight;

  bool operator==(const LayerSpec&) const = default;
};

struct LayerDescription {
  std::vector<LayerSpec> layers;
  bool operator==(const LayerDescription&) const = default;
};

// Cluster Description File, `gsim-clusters` version 1:
//   {"format": "gsim-clusters", "version": 1, "clusters": 12,
//    "assignment": [{"cluster": 0, "layers": ["encoder_0.*"]}, ...],
//    "nodes_per_cluster": 6,
//    "placement": {"gateway": 0, "q": 0, "attention/scores": 1, ...},
//    "gmi_placement": "auto",
//    "network": {"switch_latency_us": 1.1, "clock_mhz": 200,
//                "link_bytes_per_cycle": 64, "loss_probability": 0, "seed": 1}}
// Assignment patterns match a layer name exactly or, when ending in '*', by
// prefix. Placement keys are layer roles (the name after its last '.'),
// optionally refined with "/scores", "/context" for attention parts or
// "/<i>" for column partitions; unplaced kernels are mapped greedily.
// gmi_placement is auto, sender or receiver.
struct Assignment {
  int cluster = 0;
  std::vector<std::string> layers;
  bool operator==(const Assignment&) const = default;
};

struct ClusterDescription {
  int clusters = 1;
  std::vector<Assignment> assignment;
  int nodes_per_cluster = 1;
  std::map<std::string, int> placement;
  std::string gmi_placement = "auto";
  fabric::NetworkConfig network;

  bool operator==(const ClusterDescription&) const = default;
};

LayerDescription parse_layer_description(const std::string& json_text);
std::string dump_layer_description(const LayerDescription& d);
ClusterDescription parse_cluster_description(const std::string& json_text);
std::string dump_cluster_description(const ClusterDescription& d);

// Built-in description sets.
//   ibert-base  768 hidden, 12 heads, 12 encoders, one cluster per encoder
//               on six nodes, Linear tiles sized so every Linear kernel
//               has the same initiation interval
//   tiny        8 hidden, 2 heads, 3 encoders; desk-scale counterpart
struct Preset {
  ibert::EncoderConfig cfg;
  LayerDescription layers;
  ClusterDescription clusters;
};

Preset ibert_preset(const ibert::EncoderConfig& cfg, int macs_per_cycle, int nodes_per_cluster);
Preset named_preset(const std::string& name);
// layers and nodes_per_cluster <= 0 keep the preset values.
Preset named_preset(const std::string& name, int layers, int nodes_per_cluster);
std::vector<std::string> preset_names();

}  // namespace gsim::builder

#endif  // GSIM_BUILDER_DESCRIPTION_H_
