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

#ifndef GSIM_GMI_KERNELS_H_
#define GSIM_GMI_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gmi/collectives.h"
#include "runtime/kernel.h"

namespace gsim::gmi {

// Stream forms of the collectives. Output port k feeds group member k; the
// gather and reduce kernels read member k on input port k.

class BroadcastKernel : public runtime::KernelBehavior {
 public:
  explicit BroadcastKernel(size_t members) : members_(members) {}
  std::string op() const override { return "broadcast"; }
  std::vector<int> need() const override { return {0}; }
  runtime::Firing fire(std::vector<runtime::StreamPacket>& in) override;

 private:
  size_t members_;
};

class ScatterKernel : public runtime::KernelBehavior {
 public:
  ScatterKernel(size_t members, size_t chunk_bytes)
      : members_(members), chunk_(chunk_bytes) {}
  std::string op() const override { return "scatter"; }
  std::vector<int> need() const override { return {0}; }
  runtime::Firing fire(std::vector<runtime::StreamPacket>& in) override;

 private:
  size_t members_, chunk_;
};

class GatherKernel : public runtime::KernelBehavior {
 public:
  // Names identify members in incomplete-gather diagnostics.
  explicit GatherKernel(std::vector<std::string> member_names)
      : names_(std::move(member_names)) {}
  std::string op() const override { return "gather"; }
  std::vector<int> need() const override;
  runtime::Firing fire(std::vector<runtime::StreamPacket>& in) override;
  std::string stuck_reason(const std::vector<size_t>& queued) const override;

 private:
  std::vector<std::string> names_;
};

class ReduceKernel : public runtime::KernelBehavior {
 public:
  ReduceKernel(size_t members, ReduceFn fn, ElemType elem)
      : members_(members), fn_(fn), elem_(elem) {}
  std::string op() const override { return "reduce"; }
  std::vector<int> need() const override;
  runtime::Firing fire(std::vector<runtime::StreamPacket>& in) override;

 private:
  size_t members_;
  ReduceFn fn_;
  ElemType elem_;
};

// Gateway: decodes the GMI byte of each inbound inter-cluster packet, strips
// it, and hands the payload to the forwarding module or to a virtual GMI
// kernel hosted here. Unknown bytes become dead letters.
class GatewayKernel : public runtime::KernelBehavior {
 public:
  struct Virtual {
    GmiOp op = GmiOp::kBroadcast;
    std::vector<int> ports;  // member output ports, group order
    size_t chunk_bytes = 0;
  };

  GatewayKernel(std::map<uint8_t, int> forwarding, std::map<uint8_t, Virtual> virtuals)
      : forwarding_(std::move(forwarding)), virtuals_(std::move(virtuals)) {}
  std::string op() const override { return "gateway"; }
  std::vector<int> need() const override { return {0}; }
  runtime::Firing fire(std::vector<runtime::StreamPacket>& in) override;

 private:
  std::map<uint8_t, int> forwarding_;
  std::map<uint8_t, Virtual> virtuals_;
};

}  // namespace gsim::gmi

#endif  // GSIM_GMI_KERNELS_H_
