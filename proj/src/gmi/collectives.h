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

#ifndef GSIM_GMI_COLLECTIVES_H_
#define GSIM_GMI_COLLECTIVES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fabric/packet.h"

namespace gsim::gmi {

using Bytes = std::vector<uint8_t>;

enum class GmiOp { kBroadcast, kReduce, kScatter, kGather };
enum class Placement { kSenderSide, kReceiverSide };
enum class ReduceFn { kSum, kMin, kMax };
enum class ElemType { kInt8, kInt32 };

const char* op_name(GmiOp op);
GmiOp parse_op(const std::string& name);
const char* placement_name(Placement p);
Placement parse_placement(const std::string& name);
const char* reduce_fn_name(ReduceFn f);
ReduceFn parse_reduce_fn(const std::string& name);
const char* elem_name(ElemType t);
ElemType parse_elem(const std::string& name);

struct GmiKernelSpec {
  GmiOp op = GmiOp::kBroadcast;
  std::vector<fabric::KernelAddress> group;
  std::optional<fabric::KernelAddress> root;
  Placement placement = Placement::kReceiverSide;
  size_t chunk_bytes = 0;  // scatter segment size; 0 splits evenly
  ReduceFn reduce_fn = ReduceFn::kSum;
  ElemType elem = ElemType::kInt32;

  bool operator==(const GmiKernelSpec&) const = default;
};

// Empty list when the spec is well formed. An empty group is legal for
// broadcast (a warned no-op) and rejected for the other operations.
std::vector<std::string> check_spec(const GmiKernelSpec& spec);

struct BroadcastResult {
  std::vector<Bytes> copies;
  bool warned_empty = false;
};
BroadcastResult broadcast(const Bytes& msg, size_t group_size);

struct ScatterResult {
  std::vector<Bytes> segments;  // one per member, group order
  size_t underfilled = 0;       // members left without a segment
};
// Segment k covers bytes [k*chunk, (k+1)*chunk); the last one may be short.
// The chunks must cover the whole message.
ScatterResult scatter(const Bytes& msg, size_t group_size, size_t chunk_bytes);
size_t scatter_chunk(size_t msg_bytes, size_t group_size, size_t chunk_bytes);

// Concatenation in member order. Throws an "incomplete gather" simulation
// error listing the absent member indices.
Bytes gather(const std::vector<std::optional<Bytes>>& segments);

// Elementwise fold over members in group order. Length mismatch fails before
// any combination; a sum leaving the element range is an arithmetic fault.
Bytes reduce(const std::vector<Bytes>& segments, ReduceFn fn, ElemType elem);

std::vector<Bytes> allgather(const std::vector<Bytes>& msgs);

}  // namespace gsim::gmi

#endif  // GSIM_GMI_COLLECTIVES_H_
