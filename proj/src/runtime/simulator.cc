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

#include "runtime/simulator.h"

#include <algorithm>
#include <deque>
#include <queue>
#include <set>
#include <string>

#include "common/error.h"

namespace gsim::runtime {

using fabric::KernelAddress;
using fabric::NodeId;

Stimulus make_stimulus(const std::vector<std::vector<uint8_t>>& rows,
                       uint64_t start, uint64_t interval, int cluster, int gmi) {
  Stimulus s;
  s.cluster = cluster;
  s.gmi = gmi;
  for (size_t i = 0; i < rows.size(); ++i) {
    s.packets.push_back({start + i * interval, rows[i], i + 1 == rows.size()});
  }
  return s;
}

namespace {

struct Fifo {
  uint64_t capacity = 0;
  uint64_t occupied = 0;
  uint64_t reserved = 0;
  std::deque<StreamPacket> packets;
  std::vector<int> waiters;  // stalled output ports, in stall order
};

struct Pending {
  uint64_t ready = 0;
  std::vector<uint8_t> payload;
  bool end_of_frame = false;
};

struct OutPort {
  int owner = -1;  // kernel index, -1 for the host injector
  int target = -1;  // kernel index, -1 for egress
  int target_port = 0;
  bool inter_cluster = false;
  int gmi = -1;
  bool egress = false;
  std::deque<Pending> queue;
  uint64_t free_at = 0;
  bool stalled = false;
  uint64_t scheduled = UINT64_MAX;  // cycle of the pending send attempt
};

struct KernelState {
  KernelSpec spec;
  std::vector<Fifo> inputs;
  std::vector<int> outports;
  uint64_t busy_until = 0;
  uint64_t scheduled = UINT64_MAX;
};

struct InFlight {
  int target = 0;
  int port = 0;
  StreamPacket packet;
  uint64_t bytes = 0;
};

enum class EvKind { kDeliver, kFire, kSend };

struct Ev {
  uint64_t cycle;
  uint64_t seq;
  EvKind kind;
  int index;
  bool operator>(const Ev& o) const {
    return cycle != o.cycle ? cycle > o.cycle : seq > o.seq;
  }
};

Endpoint endpoint(const KernelAddress& a) { return {a.cluster, a.kernel}; }

}  // namespace

struct Simulator::Impl {
  SimConfig config;
  std::vector<KernelState> kernels;
  std::map<KernelAddress, int> index;
  std::vector<OutPort> ports;
  std::vector<InFlight> flights;
  std::priority_queue<Ev, std::vector<Ev>, std::greater<Ev>> events;
  uint64_t seq = 0;
  uint64_t now = 0;
  RunResult result;
  std::unique_ptr<fabric::Network> network;
  bool ran = false;

  void push(uint64_t cycle, EvKind kind, int i) {
    events.push({cycle, seq++, kind, i});
  }

  void log(TraceEvent e) { result.trace.events.push_back(std::move(e)); }

  Endpoint owner_endpoint(const OutPort& p) const {
    return p.owner < 0 ? Endpoint{} : endpoint(kernels[p.owner].spec.addr);
  }

  void schedule_fire(int k, uint64_t cycle) {
    KernelState& ks = kernels[k];
    if (ks.scheduled <= cycle && ks.scheduled >= now) return;
    ks.scheduled = cycle;
    push(cycle, EvKind::kFire, k);
  }

  void schedule_send(int p, uint64_t cycle) {
    OutPort& op = ports[p];
    if (op.scheduled <= cycle && op.scheduled >= now) return;
    op.scheduled = cycle;
    push(cycle, EvKind::kSend, p);
  }

  int find(int cluster, int kernel) const {
    if (cluster < 0 || cluster > 255 || kernel < 0 || kernel > 255) return -1;
    auto it = index.find({static_cast<uint8_t>(cluster), static_cast<uint8_t>(kernel)});
    return it == index.end() ? -1 : it->second;
  }

  int make_port(int owner, const Route& r, int own_cluster) {
    OutPort p;
    p.owner = owner;
    if (r.egress) {
      p.egress = true;
    } else if (r.cluster != own_cluster) {
      if (r.kernel != 0) {
        throw validation_error("inter-cluster edge bypasses gateway",
                               "destination " + std::to_string(r.cluster) + "." +
                                   std::to_string(r.kernel));
      }
      if (r.gmi < 0 || r.gmi > 255) {
        throw validation_error("encoding error",
                               "inter-cluster route to cluster " +
                                   std::to_string(r.cluster) + " lacks a GMI kernel id");
      }
      p.inter_cluster = true;
      p.gmi = r.gmi;
      p.target = find(r.cluster, 0);
      p.target_port = 0;
    } else {
      p.target = find(r.cluster, r.kernel);
      p.target_port = r.port;
    }
    if (!p.egress) {
      if (p.target < 0) {
        throw validation_error("unwired stream",
                               "no kernel " + std::to_string(r.cluster) + "." +
                                   std::to_string(r.kernel));
      }
      if (p.target_port < 0 ||
          p.target_port >= static_cast<int>(kernels[p.target].inputs.size())) {
        throw validation_error("unwired stream",
                               "kernel " + kernels[p.target].spec.addr.str() +
                                   " has no input port " + std::to_string(p.target_port));
      }
    }
    ports.push_back(std::move(p));
    return static_cast<int>(ports.size()) - 1;
  }

  NodeId resolve_node(const OutPort& p, NodeId from) {
    if (p.egress) return config.host_egress;
    const KernelState& dst = kernels[p.target];
    if (p.owner < 0) return dst.spec.node;  // the host addresses nodes directly
    auto t = config.tables.find(from);
    if (t == config.tables.end()) {
      throw simulation_error("routing fault",
                             "node " + std::to_string(from) + " has no routing tables");
    }
    fabric::GalapagosHeader h;
    h.inter_cluster = p.inter_cluster;
    h.receiver_id = p.inter_cluster ? dst.spec.addr.cluster : dst.spec.addr.kernel;
    NodeId n = fabric::route(h, t->second);
    if (n != dst.spec.node) {
      throw simulation_error("routing fault",
                             "node " + std::to_string(from) + " routes " +
                                 dst.spec.addr.str() + " to node " + std::to_string(n) +
                                 ", kernel lives on node " + std::to_string(dst.spec.node));
    }
    return n;
  }

  void try_send(int pi) {
    OutPort& p = ports[pi];
    if (p.scheduled == now) p.scheduled = UINT64_MAX;
    if (p.queue.empty()) return;
    Pending& head = p.queue.front();
    uint64_t t = std::max(head.ready, p.free_at);
    if (now < t) {
      schedule_send(pi, t);
      return;
    }
    uint64_t bytes = head.payload.size();
    Endpoint src = owner_endpoint(p);
    Endpoint dst = p.egress ? Endpoint{} : endpoint(kernels[p.target].spec.addr);
    if (!p.egress) {
      Fifo& f = kernels[p.target].inputs[p.target_port];
      bool empty = f.occupied == 0 && f.reserved == 0;
      if (!empty && f.occupied + f.reserved + bytes > f.capacity) {
        if (std::find(f.waiters.begin(), f.waiters.end(), pi) == f.waiters.end()) {
          f.waiters.push_back(pi);
        }
        if (!p.stalled) {
          p.stalled = true;
          TraceEvent e;
          e.cycle = now;
          e.type = EventType::kStall;
          e.src = src;
          e.dst = dst;
          e.bytes = bytes;
          log(std::move(e));
        }
        return;
      }
      f.reserved += bytes;
    }
    bool was_stalled = p.stalled;
    p.stalled = false;
    NodeId from = p.owner < 0 ? config.host_ingress : kernels[p.owner].spec.node;
    NodeId to = resolve_node(p, from);
    p.free_at = now + network->config().serialization_cycles(bytes);

    TraceEvent e;
    e.cycle = now;
    e.type = p.egress ? EventType::kEgress : EventType::kSend;
    e.src = src;
    e.dst = dst;
    e.bytes = bytes;
    e.gmi_bytes = p.inter_cluster ? 1 : 0;
    e.inter_cluster = p.inter_cluster;
    e.end_of_frame = head.end_of_frame;
    auto d = network->transmit(bytes, from, to, now);
    e.hops = d.hops;
    log(e);

    if (d.dropped) {
      ++result.drops;
      e.type = EventType::kDrop;
      log(e);
      if (!p.egress) {
        Fifo& f = kernels[p.target].inputs[p.target_port];
        f.reserved -= bytes;
        wake(f);
      }
    } else if (p.egress) {
      result.egress.push_back(std::move(head.payload));
      result.egress_eof.push_back(head.end_of_frame);
    } else {
      InFlight fl;
      fl.target = p.target;
      fl.port = p.target_port;
      fl.bytes = bytes;
      fl.packet.payload = std::move(head.payload);
      fl.packet.end_of_frame = head.end_of_frame;
      fl.packet.inter_cluster = p.inter_cluster;
      fl.packet.src = src;
      flights.push_back(std::move(fl));
      push(d.arrival, EvKind::kDeliver, static_cast<int>(flights.size()) - 1);
    }
    p.queue.pop_front();
    if (!p.queue.empty()) {
      schedule_send(pi, std::max(p.queue.front().ready, p.free_at));
    }
    if (was_stalled && p.owner >= 0) schedule_fire(p.owner, now);
  }

  void wake(Fifo& f) {
    std::vector<int> w;
    w.swap(f.waiters);
    // Ports stay flagged stalled; try_send re-registers them if room is lacking.
    for (int pi : w) schedule_send(pi, now);
  }

  void deliver(int fi) {
    InFlight& fl = flights[fi];
    KernelState& k = kernels[fl.target];
    Fifo& f = k.inputs[fl.port];
    f.reserved -= fl.bytes;
    f.occupied += fl.bytes;
    TraceEvent e;
    e.cycle = now;
    e.type = EventType::kRecv;
    e.src = fl.packet.src;
    e.dst = endpoint(k.spec.addr);
    e.bytes = fl.bytes;
    e.gmi_bytes = fl.packet.inter_cluster ? 1 : 0;
    e.inter_cluster = fl.packet.inter_cluster;
    e.end_of_frame = fl.packet.end_of_frame;
    log(std::move(e));
    f.packets.push_back(std::move(fl.packet));
    schedule_fire(fl.target, now);
  }

  void try_fire(int ki) {
    KernelState& k = kernels[ki];
    if (k.scheduled == now) k.scheduled = UINT64_MAX;
    if (now < k.busy_until) {
      schedule_fire(ki, k.busy_until);
      return;
    }
    for (int pi : k.outports) {
      if (ports[pi].stalled) return;
    }
    std::vector<int> need = k.spec.behavior->need();
    if (need.empty()) return;
    for (int port : need) {
      if (port < 0 || port >= static_cast<int>(k.inputs.size())) {
        throw simulation_error("kernel fault", k.spec.addr.str() + " needs missing port " +
                                                   std::to_string(port));
      }
      if (k.inputs[port].packets.empty()) return;
    }
    std::vector<StreamPacket> in;
    in.reserve(need.size());
    for (int port : need) {
      Fifo& f = k.inputs[port];
      f.occupied -= f.packets.front().payload.size();
      in.push_back(std::move(f.packets.front()));
      f.packets.pop_front();
      wake(f);
    }
    Firing fr = k.spec.behavior->fire(in);
    Endpoint self = endpoint(k.spec.addr);
    TraceEvent start;
    start.cycle = now;
    start.type = EventType::kFireStart;
    start.src = self;
    start.dst = self;
    start.iterations = fr.iterations;
    log(start);
    start.cycle = now + fr.ii;
    start.type = EventType::kFireEnd;
    log(std::move(start));
    for (Note& n : fr.notes) {
      TraceEvent e;
      e.cycle = now;
      e.type = n.type;
      e.src = self;
      e.dst = self;
      e.note = std::move(n.detail);
      log(std::move(e));
    }
    for (Emit& out : fr.outputs) {
      if (out.port < 0 || out.port >= static_cast<int>(k.outports.size())) {
        throw simulation_error("kernel fault", k.spec.addr.str() + " emits on missing port " +
                                                   std::to_string(out.port));
      }
      int pi = k.outports[out.port];
      OutPort& p = ports[pi];
      std::vector<uint8_t> payload =
          p.inter_cluster ? fabric::attach_gmi_header(out.payload, p.gmi)
                          : std::move(out.payload);
      p.queue.push_back({now + fr.latency, std::move(payload), out.end_of_frame});
      if (p.queue.size() == 1) schedule_send(pi, std::max(now + fr.latency, p.free_at));
    }
    k.busy_until = now + std::max<uint64_t>(fr.ii, 1);
    schedule_fire(ki, k.busy_until);
  }

  void diagnose() {
    // A kernel-specific explanation (e.g. an incomplete gather) wins.
    for (const KernelState& k : kernels) {
      std::vector<size_t> queued;
      bool any = false;
      for (const Fifo& f : k.inputs) {
        queued.push_back(f.packets.size());
        any = any || !f.packets.empty();
      }
      if (!any) continue;
      std::string why = k.spec.behavior->stuck_reason(queued);
      if (!why.empty()) {
        throw simulation_error("incomplete gather",
                               k.spec.addr.str() + " at cycle " + std::to_string(now) +
                                   ": " + why);
      }
    }
    for (const KernelState& k : kernels) {
      for (size_t i = 0; i < k.inputs.size(); ++i) {
        const Fifo& f = k.inputs[i];
        if (!f.waiters.empty()) {
          throw simulation_error(
              "deadlock", "blocked at cycle " + std::to_string(now) + ": FIFO " +
                              k.spec.addr.str() + " port " + std::to_string(i) + " full (" +
                              std::to_string(f.occupied) + "/" + std::to_string(f.capacity) +
                              " bytes)");
        }
      }
    }
    for (const KernelState& k : kernels) {
      for (size_t i = 0; i < k.inputs.size(); ++i) {
        const Fifo& f = k.inputs[i];
        if (!f.packets.empty()) {
          throw simulation_error(
              "deadlock", "blocked at cycle " + std::to_string(now) + ": FIFO " +
                              k.spec.addr.str() + " port " + std::to_string(i) + " holds " +
                              std::to_string(f.packets.size()) + " unconsumed packets");
        }
      }
    }
  }
};

Simulator::Simulator(SimConfig config) : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
}

Simulator::~Simulator() = default;

void Simulator::add_kernel(KernelSpec spec) {
  if (!spec.behavior) {
    throw validation_error("invalid kernel", spec.addr.str() + " has no behavior");
  }
  if (impl_->index.count(spec.addr)) {
    throw validation_error("duplicate kernel", spec.addr.str());
  }
  KernelState k;
  for (uint64_t cap : spec.input_capacity) {
    Fifo f;
    f.capacity = cap;
    k.inputs.push_back(std::move(f));
  }
  impl_->index[spec.addr] = static_cast<int>(impl_->kernels.size());
  k.spec = std::move(spec);
  impl_->kernels.push_back(std::move(k));
}

RunResult Simulator::run(const Stimulus& stimulus) {
  Impl& s = *impl_;
  if (s.ran) throw validation_error("invalid call", "simulator already ran");
  s.ran = true;
  s.network = std::make_unique<fabric::Network>(s.config.topology, s.config.network);

  for (size_t ki = 0; ki < s.kernels.size(); ++ki) {
    int own = s.kernels[ki].spec.addr.cluster;
    for (const Route& r : s.kernels[ki].spec.outputs) {
      int pi = s.make_port(static_cast<int>(ki), r, own);
      s.kernels[ki].outports.push_back(pi);
    }
  }
  Route host_route;
  host_route.cluster = stimulus.cluster;
  host_route.kernel = stimulus.gmi >= 0 ? 0 : stimulus.kernel;
  host_route.port = stimulus.gmi >= 0 ? 0 : stimulus.port;
  host_route.gmi = stimulus.gmi;
  // The host sits outside every cluster, so a GMI route is inter-cluster.
  int host = s.make_port(-1, host_route, stimulus.gmi >= 0 ? -1 : stimulus.cluster);
  for (const Injection& inj : stimulus.packets) {
    std::vector<uint8_t> payload =
        s.ports[host].inter_cluster ? fabric::attach_gmi_header(inj.payload, stimulus.gmi)
                                    : inj.payload;
    s.ports[host].queue.push_back({inj.cycle, std::move(payload), inj.end_of_frame});
  }
  if (!s.ports[host].queue.empty()) {
    s.schedule_send(host, s.ports[host].queue.front().ready);
  }

  while (!s.events.empty()) {
    Ev ev = s.events.top();
    if (ev.cycle > s.config.cycle_budget) {
      s.result.trace.incomplete = true;
      s.now = s.config.cycle_budget;
      break;
    }
    s.events.pop();
    s.now = ev.cycle;
    switch (ev.kind) {
      case EvKind::kDeliver: s.deliver(ev.index); break;
      case EvKind::kFire: s.try_fire(ev.index); break;
      case EvKind::kSend: s.try_send(ev.index); break;
    }
  }
  if (!s.result.trace.incomplete) s.diagnose();
  auto& evs = s.result.trace.events;
  std::stable_sort(evs.begin(), evs.end(), [](const TraceEvent& a, const TraceEvent& b) {
    return a.cycle < b.cycle;
  });
  s.result.trace.end_cycle = s.now;
  return std::move(s.result);
}

}  // namespace gsim::runtime
