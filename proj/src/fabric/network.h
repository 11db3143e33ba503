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

#ifndef GSIM_FABRIC_NETWORK_H_
#define GSIM_FABRIC_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fabric/packet.h"

namespace gsim::fabric {

struct NetworkConfig {
  double switch_latency_s = 1.1e-6;
  double clock_hz = 200e6;
  // 0 means unlimited bandwidth (no serialization delay).
  uint32_t link_bytes_per_cycle = 64;
  double loss_probability = 0.0;
  uint64_t seed = 1;

  uint64_t switch_latency_cycles() const;
  uint64_t serialization_cycles(size_t bytes) const;
  bool operator==(const NetworkConfig&) const = default;
};

struct Topology {
  std::vector<std::string> switches;
  std::vector<std::pair<std::string, std::string>> links;
  std::map<NodeId, std::string> attachments;  // node -> switch name

  bool operator==(const Topology&) const = default;
};

// Switches traversed between two nodes: 0 for the same node, 1 for nodes on
// one switch, 1 + k for k inter-switch links on the shortest path.
class HopTable {
 public:
  explicit HopTable(const Topology& topology);
  int hops(NodeId a, NodeId b) const;

 private:
  std::map<NodeId, size_t> switch_of_;
  std::vector<std::vector<int>> distance_;
};

// Stateful stand-in for the UDP fabric: it owns the loss RNG. Mutated only
// by the simulator's event loop.
class Network {
 public:
  Network(const Topology& topology, const NetworkConfig& config);

  struct Delivery {
    bool dropped = false;
    uint64_t arrival = 0;
    int hops = 0;
  };

  // arrival = departure + serialization + hops * d. Nodes must be attached.
  Delivery transmit(size_t bytes, NodeId src, NodeId dst, uint64_t departure);

  const NetworkConfig& config() const { return config_; }
  int hops(NodeId a, NodeId b) const { return hops_.hops(a, b); }

 private:
  NetworkConfig config_;
  HopTable hops_;
  std::mt19937_64 rng_;
};

}  // namespace gsim::fabric

#endif  // GSIM_FABRIC_NETWORK_H_
