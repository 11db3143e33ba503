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

#include "gmi/kernels.h"

#include "common/error.h"
#include "fabric/packet.h"

namespace gsim::gmi {

using runtime::EventType;
using runtime::Firing;
using runtime::StreamPacket;

namespace {

uint64_t flits(size_t bytes) { return fabric::flit_count(bytes); }

void fan_out(Firing& f, const Bytes& msg, const std::vector<int>& ports, bool eof) {
  for (int p : ports) f.outputs.push_back({p, msg, eof});
}

void scatter_out(Firing& f, const Bytes& msg, const std::vector<int>& ports, size_t chunk,
                 bool eof) {
  ScatterResult r = scatter(msg, ports.size(), chunk);
  for (size_t k = 0; k < ports.size(); ++k) {
    if (r.segments[k].empty() && !msg.empty()) {
      f.notes.push_back({EventType::kUnderfill, "member " + std::to_string(k)});
      continue;
    }
    f.outputs.push_back({ports[k], std::move(r.segments[k]), eof});
  }
}

std::vector<int> iota_ports(size_t n) {
  std::vector<int> p(n);
  for (size_t k = 0; k < n; ++k) p[k] = static_cast<int>(k);
  return p;
}

}  // namespace

Firing BroadcastKernel::fire(std::vector<StreamPacket>& in) {
  Firing f;
  f.ii = flits(in[0].payload.size());
  f.latency = 1 + f.ii;
  if (members_ == 0) f.notes.push_back({EventType::kWarning, "broadcast to an empty group"});
  fan_out(f, in[0].payload, iota_ports(members_), in[0].end_of_frame);
  return f;
}

Firing ScatterKernel::fire(std::vector<StreamPacket>& in) {
  Firing f;
  f.ii = flits(in[0].payload.size());
  f.latency = 2;
  scatter_out(f, in[0].payload, iota_ports(members_), chunk_, in[0].end_of_frame);
  return f;
}

std::vector<int> GatherKernel::need() const { return iota_ports(names_.size()); }

Firing GatherKernel::fire(std::vector<StreamPacket>& in) {
  std::vector<std::optional<Bytes>> parts;
  bool eof = false;
  for (auto& p : in) {
    eof = eof || p.end_of_frame;
    parts.emplace_back(std::move(p.payload));
  }
  Firing f;
  Bytes out = gather(parts);
  f.ii = flits(out.size());
  f.latency = f.ii + 1;
  f.outputs.push_back({0, std::move(out), eof});
  return f;
}

std::string GatherKernel::stuck_reason(const std::vector<size_t>& queued) const {
  std::string absent;
  for (size_t k = 0; k < queued.size() && k < names_.size(); ++k) {
    if (queued[k] == 0) absent += (absent.empty() ? "" : ", ") + names_[k];
  }
  if (absent.empty()) return {};
  return "missing segments from members " + absent;
}

std::vector<int> ReduceKernel::need() const { return iota_ports(members_); }

Firing ReduceKernel::fire(std::vector<StreamPacket>& in) {
  std::vector<Bytes> parts;
  bool eof = false;
  for (auto& p : in) {
    eof = eof || p.end_of_frame;
    parts.push_back(std::move(p.payload));
  }
  Firing f;
  Bytes out = reduce(parts, fn_, elem_);
  size_t width = elem_ == ElemType::kInt8 ? 1 : 4;
  f.ii = std::max<uint64_t>(1, (out.size() / width + 15) / 16);
  f.latency = f.ii + 2;
  f.outputs.push_back({0, std::move(out), eof});
  return f;
}

Firing GatewayKernel::fire(std::vector<StreamPacket>& in) {
  StreamPacket& p = in[0];
  Firing f;
  f.ii = 1 + flits(p.payload.size());
  f.latency = f.ii + 1;
  if (!p.inter_cluster || p.payload.empty()) {
    f.notes.push_back({EventType::kDeadLetter, "packet without a GMI header"});
    return f;
  }
  auto [dest, body] = fabric::strip_gmi_header(p.payload);
  if (auto it = forwarding_.find(dest); it != forwarding_.end()) {
    f.outputs.push_back({it->second, std::move(body), p.end_of_frame});
    return f;
  }
  if (auto it = virtuals_.find(dest); it != virtuals_.end()) {
    const Virtual& v = it->second;
    switch (v.op) {
      case GmiOp::kBroadcast:
        if (v.ports.empty()) f.notes.push_back({EventType::kWarning, "broadcast to an empty group"});
        fan_out(f, body, v.ports, p.end_of_frame);
        return f;
      case GmiOp::kScatter:
        scatter_out(f, body, v.ports, v.chunk_bytes, p.end_of_frame);
        return f;
      default:
        throw validation_error("invalid gateway",
                               std::string("virtual ") + op_name(v.op) +
                                   " kernels cannot be hosted in a gateway");
    }
  }
  f.notes.push_back({EventType::kDeadLetter, "no kernel " + std::to_string(dest)});
  return f;
}

}  // namespace gsim::gmi
