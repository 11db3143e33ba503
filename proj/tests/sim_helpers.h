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

#ifndef GSIM_TESTS_SIM_HELPERS_H_
#define GSIM_TESTS_SIM_HELPERS_H_

#include <memory>
#include <vector>

#include "runtime/kernel.h"
#include "runtime/simulator.h"

namespace gsim::testing {

using namespace gsim::runtime;

constexpr fabric::NodeId kHostIn = 100;
constexpr fabric::NodeId kHostOut = 101;

// One switch, host nodes attached to it, d = 0 unless overridden.
inline SimConfig flat_config(std::vector<fabric::NodeId> nodes, double d = 0.0) {
  SimConfig c;
  c.network.switch_latency_s = d;
  c.topology.switches = {"s0"};
  nodes.push_back(kHostIn);
  nodes.push_back(kHostOut);
  for (auto n : nodes) c.topology.attachments[n] = "s0";
  c.host_ingress = kHostIn;
  c.host_egress = kHostOut;
  return c;
}

inline KernelSpec pass(uint8_t cluster, uint8_t kernel, fabric::NodeId node, uint64_t ii,
                uint64_t latency, Route out, uint64_t capacity = 1 << 20) {
  KernelSpec k;
  k.addr = {cluster, kernel};
  k.node = node;
  k.input_capacity = {capacity};
  k.outputs = {out};
  k.behavior = std::make_unique<PassThrough>(ii, latency);
  return k;
}

inline KernelSpec kernel(uint8_t cluster, uint8_t id, fabric::NodeId node,
                         std::vector<uint64_t> capacity, std::vector<Route> outputs,
                         std::unique_ptr<KernelBehavior> behavior) {
  KernelSpec k;
  k.addr = {cluster, id};
  k.node = node;
  k.input_capacity = std::move(capacity);
  k.outputs = std::move(outputs);
  k.behavior = std::move(behavior);
  return k;
}

inline Route egress() {
  Route r;
  r.egress = true;
  return r;
}

inline Route to(int cluster, int kernel, int port = 0, int gmi = -1) {
  Route r;
  r.cluster = cluster;
  r.kernel = kernel;
  r.port = port;
  r.gmi = gmi;
  return r;
}

inline Stimulus direct(int cluster, int kernel, std::vector<uint64_t> cycles, size_t bytes = 64) {
  Stimulus s;
  s.cluster = cluster;
  s.kernel = kernel;
  for (size_t i = 0; i < cycles.size(); ++i) {
    std::vector<uint8_t> p(bytes, static_cast<uint8_t>(i));
    s.packets.push_back({cycles[i], p, i + 1 == cycles.size()});
  }
  return s;
}

inline std::vector<uint64_t> cycles_of(const SimTrace& t, EventType type, Endpoint src) {
  std::vector<uint64_t> out;
  for (const auto& e : t.events) {
    if (e.type == type && e.src == src) out.push_back(e.cycle);
  }
  return out;
}

}  // namespace gsim::testing

#endif  // GSIM_TESTS_SIM_HELPERS_H_
