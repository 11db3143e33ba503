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

#include "gmi/collectives.h"

#include <algorithm>
#include <limits>
#include <set>

#include "common/error.h"
#include "common/io.h"

namespace gsim::gmi {

const char* op_name(GmiOp op) {
  switch (op) {
    case GmiOp::kBroadcast: return "broadcast";
    case GmiOp::kReduce: return "reduce";
    case GmiOp::kScatter: return "scatter";
    case GmiOp::kGather: return "gather";
  }
  return "?";
}

GmiOp parse_op(const std::string& name) {
  for (GmiOp op : {GmiOp::kBroadcast, GmiOp::kReduce, GmiOp::kScatter, GmiOp::kGather}) {
    if (name == op_name(op)) return op;
  }
  throw validation_error("unknown GMI operation", name);
}

const char* placement_name(Placement p) {
  return p == Placement::kSenderSide ? "sender" : "receiver";
}

Placement parse_placement(const std::string& name) {
  if (name == "sender") return Placement::kSenderSide;
  if (name == "receiver") return Placement::kReceiverSide;
  throw validation_error("unknown placement", name);
}

const char* reduce_fn_name(ReduceFn f) {
  switch (f) {
    case ReduceFn::kSum: return "sum";
    case ReduceFn::kMin: return "min";
    case ReduceFn::kMax: return "max";
  }
  return "?";
}

ReduceFn parse_reduce_fn(const std::string& name) {
  for (ReduceFn f : {ReduceFn::kSum, ReduceFn::kMin, ReduceFn::kMax}) {
    if (name == reduce_fn_name(f)) return f;
  }
  throw validation_error("unknown reduce function", name);
}

const char* elem_name(ElemType t) { return t == ElemType::kInt8 ? "int8" : "int32"; }

ElemType parse_elem(const std::string& name) {
  if (name == "int8") return ElemType::kInt8;
  if (name == "int32") return ElemType::kInt32;
  throw validation_error("unknown element type", name);
}

std::vector<std::string> check_spec(const GmiKernelSpec& spec) {
  std::vector<std::string> out;
  if (spec.group.empty() && spec.op != GmiOp::kBroadcast) {
    out.push_back(std::string(op_name(spec.op)) + " with an empty group");
  }
  std::set<fabric::KernelAddress> seen;
  for (const auto& a : spec.group) {
    if (!seen.insert(a).second) out.push_back("duplicate group member " + a.str());
  }
  if (spec.root && !seen.count(*spec.root)) {
    out.push_back("root " + spec.root->str() + " is not a group member");
  }
  return out;
}

BroadcastResult broadcast(const Bytes& msg, size_t group_size) {
  BroadcastResult r;
  r.warned_empty = group_size == 0;
  r.copies.assign(group_size, msg);
  return r;
}

size_t scatter_chunk(size_t msg_bytes, size_t group_size, size_t chunk_bytes) {
  if (chunk_bytes > 0) return chunk_bytes;
  if (group_size == 0) return msg_bytes;
  return (msg_bytes + group_size - 1) / group_size;
}

ScatterResult scatter(const Bytes& msg, size_t group_size, size_t chunk_bytes) {
  if (group_size == 0) throw validation_error("invalid GMI spec", "scatter with an empty group");
  size_t chunk = scatter_chunk(msg.size(), group_size, chunk_bytes);
  if (chunk * group_size < msg.size()) {
    throw validation_error("invalid GMI spec",
                           std::to_string(group_size) + " chunks of " + std::to_string(chunk) +
                               " bytes cannot hold a " + std::to_string(msg.size()) +
                               "-byte message");
  }
  ScatterResult r;
  for (size_t k = 0; k < group_size; ++k) {
    size_t begin = std::min(msg.size(), k * chunk);
    size_t end = std::min(msg.size(), begin + chunk);
    if (begin == end && !(k == 0 && msg.empty())) ++r.underfilled;
    r.segments.emplace_back(msg.begin() + begin, msg.begin() + end);
  }
  return r;
}

Bytes gather(const std::vector<std::optional<Bytes>>& segments) {
  std::string absent;
  Bytes out;
  for (size_t k = 0; k < segments.size(); ++k) {
    if (!segments[k]) {
      absent += (absent.empty() ? "" : ", ") + std::to_string(k);
      continue;
    }
    out.insert(out.end(), segments[k]->begin(), segments[k]->end());
  }
  if (!absent.empty()) {
    throw simulation_error("incomplete gather", "missing segments from members " + absent);
  }
  return out;
}

namespace {

template <typename T>
Bytes fold(const std::vector<Bytes>& segments, ReduceFn fn) {
  size_t n = segments[0].size() / sizeof(T);
  std::vector<int64_t> acc(n);
  for (size_t i = 0; i < n; ++i) acc[i] = load_le<T>(segments[0].data() + i * sizeof(T));
  for (size_t k = 1; k < segments.size(); ++k) {
    for (size_t i = 0; i < n; ++i) {
      int64_t v = load_le<T>(segments[k].data() + i * sizeof(T));
      switch (fn) {
        case ReduceFn::kSum:
          acc[i] += v;
          if (acc[i] > std::numeric_limits<T>::max() || acc[i] < std::numeric_limits<T>::min()) {
            throw simulation_error("arithmetic fault",
                                   "reduce sum overflows at element " + std::to_string(i));
          }
          break;
        case ReduceFn::kMin: acc[i] = std::min(acc[i], v); break;
        case ReduceFn::kMax: acc[i] = std::max(acc[i], v); break;
      }
    }
  }
  Bytes out;
  out.reserve(segments[0].size());
  for (int64_t v : acc) append_le<T>(out, static_cast<T>(v));
  return out;
}

}  // namespace

Bytes reduce(const std::vector<Bytes>& segments, ReduceFn fn, ElemType elem) {
  if (segments.empty()) throw validation_error("invalid GMI spec", "reduce with an empty group");
  size_t width = elem == ElemType::kInt8 ? 1 : 4;
  for (const Bytes& s : segments) {
    if (s.size() != segments[0].size()) {
      throw validation_error("length mismatch",
                             "reduce segments of " + std::to_string(segments[0].size()) +
                                 " and " + std::to_string(s.size()) + " bytes");
    }
  }
  if (segments[0].size() % width != 0) {
    throw validation_error("length mismatch", "segment is not a whole number of elements");
  }
  return elem == ElemType::kInt8 ? fold<int8_t>(segments, fn) : fold<int32_t>(segments, fn);
}

std::vector<Bytes> allgather(const std::vector<Bytes>& msgs) {
  std::vector<std::optional<Bytes>> parts(msgs.begin(), msgs.end());
  return broadcast(gather(parts), msgs.size()).copies;
}

}  // namespace gsim::gmi
