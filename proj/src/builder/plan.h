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

#ifndef GSIM_BUILDER_PLAN_H_
#define GSIM_BUILDER_PLAN_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fabric/network.h"
#include "fabric/routing.h"
#include "gmi/collectives.h"
#include "ibert/encoder.h"
#include "ibert/stream.h"
#include "runtime/simulator.h"

namespace gsim::builder {

struct PlanInput {
  uint64_t capacity = 0;   // FIFO bytes
  uint32_t row_bytes = 0;  // widest packet on this stream
  std::string from;        // producer label

  bool operator==(const PlanInput&) const = default;
};

// One physical kernel. kind is gateway, compute or gmi; op selects the
// behavior:
//   gateway                          forwarding + virtual kernels
//   linear_quant, linear_gelu        params = Linear module, [col_begin, col_end)
//   attention_scores                 head, aux = {q module, k module}
//   softmax_matmul                   head, params = attention module, aux = {v module}
//   layernorm                        params = LayerNorm module
//   broadcast, scatter, gather, reduce   gmi spec
struct PlanKernel {
  int id = 0;
  std::string label;
  std::string kind;
  std::string op;
  fabric::NodeId node = 0;
  std::string layer;
  std::string params;
  std::vector<std::string> aux;
  int col_begin = 0;
  int col_end = 0;
  int head = -1;
  ibert::KernelHw hw;
  std::vector<PlanInput> inputs;
  std::vector<runtime::Route> outputs;
  std::optional<gmi::GmiKernelSpec> gmi;
  std::vector<std::pair<int, int>> forwarding;  // gateway: GMI byte -> output port
  double weight = 0;

  bool operator==(const PlanKernel&) const = default;
};

// Collective hosted in the gateway; its id is the GMI byte that selects it.
struct PlanVirtual {
  int id = 0;
  std::string label;
  gmi::GmiOp op = gmi::GmiOp::kBroadcast;
  std::vector<int> ports;  // gateway output ports, member order
  size_t chunk_bytes = 0;

  bool operator==(const PlanVirtual&) const = default;
};

struct PlanCluster {
  int id = 0;
  std::vector<int> compute_ids;
  std::vector<int> communication_ids;
  std::vector<int> virtual_ids;
  std::vector<PlanKernel> kernels;  // ordered by id
  std::vector<PlanVirtual> virtuals;

  const PlanKernel* find(int kernel) const;
  bool operator==(const PlanCluster&) const = default;
};

// Host endpoints. Input rows enter cluster input_cluster through its
// gateway with GMI byte input_gmi; the output leaves kernel
// (output_cluster, output_kernel) for the egress node.
struct PlanHost {
  int input_cluster = 0;
  int input_gmi = 0;
  uint32_t input_row_bytes = 0;
  fabric::NodeId ingress = 0;
  fabric::NodeId egress = 0;
  int output_cluster = 0;
  int output_kernel = 0;
  uint32_t output_row_bytes = 0;
  std::string output_params;  // module whose scale the output carries

  bool operator==(const PlanHost&) const = default;
};

// Deployment plan, `gsim-plan` version 1 JSON.
struct ClusterPlan {
  std::string model_fs;
  ibert::EncoderConfig cfg;
  int nodes_per_cluster = 1;
  fabric::NetworkConfig network;
  fabric::Topology topology;
  std::map<fabric::NodeId, fabric::RoutingTables> routing;
  std::vector<PlanCluster> clusters;
  PlanHost host;

  const PlanKernel* find(int cluster, int kernel) const;
  size_t max_stored_addresses() const;
  bool operator==(const ClusterPlan&) const = default;
};

std::string dump_plan(const ClusterPlan& plan);
ClusterPlan parse_plan(const std::string& json_text);

}  // namespace gsim::builder

#endif  // GSIM_BUILDER_PLAN_H_
