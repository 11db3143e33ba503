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

#ifndef GSIM_RUNTIME_KERNEL_H_
#define GSIM_RUNTIME_KERNEL_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "runtime/trace.h"

namespace gsim::runtime {

// One message as seen by a receiving kernel. Inter-cluster messages still
// carry their one-byte GMI header; the gateway strips it.
struct StreamPacket {
  std::vector<uint8_t> payload;
  bool end_of_frame = false;
  bool inter_cluster = false;
  Endpoint src;
};

struct Emit {
  int port = 0;  // index into the kernel's output destinations
  std::vector<uint8_t> payload;
  bool end_of_frame = false;
};

struct Note {
  EventType type;
  std::string detail;
};

// Cost and effect of one firing. The kernel is busy for `ii` cycles; its
// outputs become ready `latency` cycles after the firing starts and leave in
// emission order.
struct Firing {
  uint64_t ii = 1;
  uint64_t latency = 1;
  std::vector<Emit> outputs;
  uint32_t iterations = 0;
  std::vector<Note> notes;
};

// Step function of a streaming kernel. Implementations keep private state
// only; the simulator owns all streams.
class KernelBehavior {
 public:
  virtual ~KernelBehavior() = default;

  virtual std::string op() const = 0;
  // Input ports that must each hold a packet before the next firing. The
  // firing consumes exactly one packet from each, in this order.
  virtual std::vector<int> need() const = 0;
  virtual Firing fire(std::vector<StreamPacket>& inputs) = 0;
  // Called when a run ends with packets queued at this kernel. A non-empty
  // string replaces the generic deadlock diagnostic.
  virtual std::string stuck_reason(const std::vector<size_t>& /*queued_per_port*/) const {
    return {};
  }
};

// Forwards each packet from port 0 to output 0 after a fixed cost.
class PassThrough : public KernelBehavior {
 public:
  PassThrough(uint64_t ii, uint64_t latency) : ii_(ii), latency_(latency) {}
  std::string op() const override { return "pass_through"; }
  std::vector<int> need() const override { return {0}; }
  Firing fire(std::vector<StreamPacket>& in) override {
    Firing f;
    f.ii = ii_;
    f.latency = latency_;
    f.outputs.push_back({0, std::move(in[0].payload), in[0].end_of_frame});
    return f;
  }

 private:
  uint64_t ii_, latency_;
};

}  // namespace gsim::runtime

#endif  // GSIM_RUNTIME_KERNEL_H_
