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

#ifndef GSIM_RUNTIME_SIMULATOR_H_
#define GSIM_RUNTIME_SIMULATOR_H_

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "fabric/network.h"
#include "fabric/packet.h"
#include "fabric/routing.h"
#include "runtime/kernel.h"
#include "runtime/trace.h"

namespace gsim::runtime {

// Output destination of a kernel port. A destination in another cluster is
// sent to that cluster's gateway (kernel 0, port 0) with a one-byte GMI
// header naming `gmi`; `kernel` must then be 0.
struct Route {
  int cluster = 0;
  int kernel = 0;
  int port = 0;
  int gmi = -1;
  bool egress = false;  // to the host sink

  bool operator==(const Route&) const = default;
};

struct KernelSpec {
  fabric::KernelAddress addr;
  fabric::NodeId node = 0;
  std::vector<uint64_t> input_capacity;  // bytes, one entry per input port
  std::vector<Route> outputs;
  std::unique_ptr<KernelBehavior> behavior;
};

struct Injection {
  uint64_t cycle = 0;
  std::vector<uint8_t> payload;
  bool end_of_frame = false;
};

// Host input schedule. With gmi >= 0 the host addresses the cluster's
// gateway through the inter-cluster path; otherwise it writes straight into
// (cluster, kernel, port).
struct Stimulus {
  int cluster = 0;
  int kernel = 0;
  int port = 0;
  int gmi = -1;
  std::vector<Injection> packets;
};

// Rows injected at start, start + interval, ...; the last row ends the frame.
Stimulus make_stimulus(const std::vector<std::vector<uint8_t>>& rows,
                       uint64_t start, uint64_t interval, int cluster, int gmi);

struct SimConfig {
  fabric::Topology topology;
  fabric::NetworkConfig network;
  std::map<fabric::NodeId, fabric::RoutingTables> tables;
  fabric::NodeId host_ingress = 0;
  fabric::NodeId host_egress = 0;
  uint64_t cycle_budget = UINT64_MAX;
};

struct RunResult {
  SimTrace trace;
  std::vector<std::vector<uint8_t>> egress;  // payloads in arrival order
  std::vector<bool> egress_eof;
  uint64_t drops = 0;
};

// Single-threaded discrete-event executor. Each kernel output port
// serializes its packets; a packet leaves only once the receiver FIFO has
// room for it (credit reserved at departure, released on consumption).
// Throws simulation errors for routing faults, deadlock and incomplete
// gathers; a run cut short by the cycle budget is flagged incomplete.
class Simulator {
 public:
  explicit Simulator(SimConfig config);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void add_kernel(KernelSpec spec);
  // Consumes the kernels' state; call once.
  RunResult run(const Stimulus& stimulus);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gsim::runtime

#endif  // GSIM_RUNTIME_SIMULATOR_H_
