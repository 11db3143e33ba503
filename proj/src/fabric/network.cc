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

#include "fabric/network.h"

#include <cmath>
#include <deque>
#include <limits>

#include "common/error.h"

namespace gsim::fabric {

uint64_t NetworkConfig::switch_latency_cycles() const {
  return static_cast<uint64_t>(std::llround(switch_latency_s * clock_hz));
}

uint64_t NetworkConfig::serialization_cycles(size_t bytes) const {
  if (link_bytes_per_cycle == 0) return 0;
  return (bytes + link_bytes_per_cycle - 1) / link_bytes_per_cycle;
}

HopTable::HopTable(const Topology& topology) {
  std::map<std::string, size_t> index;
  for (const auto& name : topology.switches) {
    if (!index.emplace(name, index.size()).second) {
      throw validation_error("configuration error", "duplicate switch '" + name + "'");
    }
  }
  auto lookup = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) {
      throw validation_error("configuration error", "unknown switch '" + name + "'");
    }
    return it->second;
  };
  const size_t n = index.size();
  std::vector<std::vector<size_t>> adj(n);
  for (const auto& [a, b] : topology.links) {
    size_t ia = lookup(a), ib = lookup(b);
    adj[ia].push_back(ib);
    adj[ib].push_back(ia);
  }
  for (const auto& [node, sw] : topology.attachments) switch_of_[node] = lookup(sw);

  distance_.assign(n, std::vector<int>(n, -1));
  for (size_t s = 0; s < n; ++s) {
    std::deque<size_t> queue{s};
    distance_[s][s] = 0;
    while (!queue.empty()) {
      size_t u = queue.front();
      queue.pop_front();
      for (size_t v : adj[u]) {
        if (distance_[s][v] < 0) {
          distance_[s][v] = distance_[s][u] + 1;
          queue.push_back(v);
        }
      }
    }
  }
}

int HopTable::hops(NodeId a, NodeId b) const {
  auto ia = switch_of_.find(a);
  auto ib = switch_of_.find(b);
  if (ia == switch_of_.end() || ib == switch_of_.end()) {
    NodeId missing = ia == switch_of_.end() ? a : b;
    throw validation_error("configuration error",
                           "node " + std::to_string(missing) + " is not attached to a switch");
  }
  if (a == b) return 0;
  int d = distance_[ia->second][ib->second];
  if (d < 0) {
    throw validation_error("configuration error", "no switch path between nodes " +
                                                      std::to_string(a) + " and " +
                                                      std::to_string(b));
  }
  return d + 1;
}

Network::Network(const Topology& topology, const NetworkConfig& config)
    : config_(config), hops_(topology), rng_(config.seed) {
  if (!(config.loss_probability >= 0.0 && config.loss_probability <= 1.0)) {
    throw validation_error("configuration error", "loss probability outside [0, 1]");
  }
  if (!(config.clock_hz > 0)) {
    throw validation_error("configuration error", "clock frequency must be positive");
  }
}

Network::Delivery Network::transmit(size_t bytes, NodeId src, NodeId dst,
                                    uint64_t departure) {
  Delivery d;
  d.hops = hops_.hops(src, dst);
  if (config_.loss_probability > 0.0) {
    // 53 random bits mapped to [0, 1); identical on every platform.
    double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    if (u < config_.loss_probability) {
      d.dropped = true;
      return d;
    }
  }
  d.arrival = departure + config_.serialization_cycles(bytes) +
              static_cast<uint64_t>(d.hops) * config_.switch_latency_cycles();
  return d;
}

}  // namespace gsim::fabric
