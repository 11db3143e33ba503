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

#include "perfmodel/model.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "common/error.h"
#include "common/io.h"

namespace gsim::perfmodel {
namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string pad(const std::string& s, size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Nearest multiple of `unit`, halves up. Non-negative inputs only.
int64_t round_to(int64_t v, int64_t unit) { return (v + unit / 2) / unit * unit; }

}  // namespace

PipelineModel from_components(const runtime::LatencyComponents& c, int layers) {
  PipelineModel m;
  m.layers = layers;
  m.t = static_cast<double>(c.t);
  m.x = static_cast<double>(c.x);
  m.i = static_cast<double>(c.i);
  m.d = c.d;
  m.f = c.f;
  return m;
}

void check(const PipelineModel& m) {
  if (m.layers < 1) throw validation_error("invalid model", "L must be at least 1");
  if (!(m.f > 0)) throw validation_error("invalid model", "clock frequency must be positive");
  if (!(m.d >= 0)) throw validation_error("invalid model", "switch latency must be non-negative");
  if (!(m.x >= 0) || !(m.t >= m.x)) {
    throw validation_error("invalid model", "need 0 <= X <= T, got X=" + format_double(m.x) +
                                                " T=" + format_double(m.t));
  }
  if (!(m.i >= 0)) throw validation_error("invalid model", "I must be non-negative");
}

double end_to_end_latency(const PipelineModel& m) {
  check(m);
  return m.t / m.f + (m.layers - 1) * (m.x / m.f + m.d);
}

double end_to_end_latency_no_switch(const PipelineModel& m) {
  PipelineModel z = m;
  z.d = 0;
  return end_to_end_latency(z);
}

double end_to_end_cycles(const PipelineModel& m) {
  check(m);
  return m.t + (m.layers - 1) * (m.x + m.d * m.f);
}

double throughput(const PipelineModel& m, int seq) {
  check(m);
  if (seq < 1) throw validation_error("invalid model", "sequence length must be positive");
  if (m.i == 0) {
    if (m.t == 0) throw validation_error("invalid model", "T = 0 and I = 0");
    return m.f / m.t;
  }
  return m.f / (seq * m.i);
}

std::vector<CycleRow> parse_cycle_table(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::vector<CycleRow> rows;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    const std::string where = "cycle table line " + std::to_string(lineno);
    if (cells.size() != 4) throw validation_error("malformed table", where + ": expected 4 columns");
    if (!header) {
      if (cells != std::vector<std::string>{"seq", "X", "T", "I"}) {
        throw validation_error("malformed table", where + ": header must be seq,X,T,I");
      }
      header = true;
      continue;
    }
    CycleRow r;
    try {
      size_t used = 0;
      r.seq = std::stoi(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("seq");
      double* dst[] = {&r.x, &r.t, &r.i};
      for (int c = 0; c < 3; ++c) {
        *dst[c] = std::stod(cells[c + 1], &used);
        if (used != cells[c + 1].size()) throw std::invalid_argument("value");
      }
    } catch (const std::logic_error&) {
      throw validation_error("malformed table", where + ": not a number");
    }
    if (r.seq < 1 || r.x < 0 || r.t < r.x || r.i < 0) {
      throw validation_error("malformed table", where + ": need seq >= 1 and 0 <= X <= T, I >= 0");
    }
    if (!rows.empty() && r.seq <= rows.back().seq) {
      throw validation_error("malformed table", where + ": seq must increase");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw validation_error("malformed table", "cycle table has no rows");
  return rows;
}

std::string format_cycle_table(const std::vector<CycleRow>& rows) {
  std::string out = "seq,X,T,I\n";
  for (const CycleRow& r : rows) {
    out += std::to_string(r.seq) + "," + format_double(r.x) + "," + format_double(r.t) + "," +
           format_double(r.i) + "\n";
  }
  return out;
}

CycleRow interpolate(const std::vector<CycleRow>& table, double seq) {
  if (table.empty()) throw validation_error("malformed table", "cycle table has no rows");
  if (seq < table.front().seq || seq > table.back().seq) {
    throw validation_error("out of range", "sequence length " + format_double(seq) +
                                               " outside the table's " +
                                               std::to_string(table.front().seq) + ".." +
                                               std::to_string(table.back().seq));
  }
  auto hi = std::lower_bound(table.begin(), table.end(), seq,
                             [](const CycleRow& r, double s) { return r.seq < s; });
  if (hi->seq == seq) return *hi;
  const CycleRow& a = *(hi - 1);
  const CycleRow& b = *hi;
  const double w = (seq - a.seq) / (b.seq - a.seq);
  CycleRow r;
  r.seq = static_cast<int>(std::lround(seq));
  r.x = a.x + w * (b.x - a.x);
  r.t = a.t + w * (b.t - a.t);
  r.i = a.i + w * (b.i - a.i);
  return r;
}

std::vector<LatencyRow> latency_table(const std::vector<CycleRow>& table, int layers, double d,
                                      double f) {
  std::vector<LatencyRow> out;
  for (const CycleRow& c : table) {
    PipelineModel m{layers, c.t, c.x, c.i, d, f};
    LatencyRow r;
    r.seq = c.seq;
    r.x = c.x;
    r.t = c.t;
    r.i = c.i;
    r.latency_s = end_to_end_latency(m);
    r.latency_no_switch_s = end_to_end_latency_no_switch(m);
    r.throughput = throughput(m, c.seq);
    out.push_back(r);
  }
  return out;
}

std::string latency_csv(const std::vector<LatencyRow>& rows) {
  std::string out = "seq,X,T,I,latency_ms,latency_no_switch_ms,throughput_per_s\n";
  for (const LatencyRow& r : rows) {
    out += std::to_string(r.seq) + "," + format_double(r.x) + "," + format_double(r.t) + "," +
           format_double(r.i) + "," + format_double(r.latency_s * 1e3) + "," +
           format_double(r.latency_no_switch_s * 1e3) + "," + format_double(r.throughput) + "\n";
  }
  return out;
}

std::string latency_text(const std::vector<LatencyRow>& rows) {
  const size_t w[] = {5, 10, 10, 8, 12, 12, 12};
  const char* head[] = {"seq", "X", "T", "I", "ms", "ms (d=0)", "inf/s"};
  std::string out;
  for (int c = 0; c < 7; ++c) out += pad(head[c], w[c]) + (c < 6 ? " " : "\n");
  for (const LatencyRow& r : rows) {
    const std::string cells[] = {std::to_string(r.seq),
                                 fmt("%.0f", r.x),
                                 fmt("%.0f", r.t),
                                 fmt("%.0f", r.i),
                                 fmt("%.3f", r.latency_s * 1e3),
                                 fmt("%.3f", r.latency_no_switch_s * 1e3),
                                 fmt("%.1f", r.throughput)};
    for (int c = 0; c < 7; ++c) out += pad(cells[c], w[c]) + (c < 6 ? " " : "\n");
  }
  return out;
}

VersalAllocation default_allocation(const ibert::EncoderConfig& cfg) {
  cfg.check();
  const int64_t m = cfg.max_seq, h = cfg.hidden, f = cfg.ffn, heads = cfg.heads;
  const int64_t hd = cfg.head_dim();
  constexpr int64_t kCols = 32;
  auto cols = [&](int64_t n) { return (n + kCols - 1) / kCols; };
  VersalAllocation a;
  a.kernels = {
      {"q", m, h, h, 1, cols(h), 0},
      {"k", m, h, h, 1, cols(h), 0},
      {"v", m, h, h, 1, cols(h), 0},
      {"scores", m, hd, m, heads, heads, 1},
      {"context", m, m, hd, heads, heads, 1},
      {"attn_out", m, h, h, 1, cols(h), 1},
      {"ffn1", m, h, f, 1, cols(f), 1},
      {"ffn2", m, f, h, 1, cols(f), 1},
  };
  return a;
}

VersalEstimate versal_estimate(const ibert::EncoderConfig& cfg, const VersalAllocation& alloc) {
  cfg.check();
  if (alloc.kernels.empty()) throw validation_error("allocation fault", "no AIE kernels");
  VersalEstimate e;
  e.layers = cfg.layers;
  int64_t phase_ns[2] = {0, 0};
  for (const AieKernel& k : alloc.kernels) {
    if (k.aies < 1 || k.m < 1 || k.k < 1 || k.n < 1 || k.instances < 1) {
      throw validation_error("allocation fault", k.name + ": dimensions and AIE count must be positive");
    }
    if (k.phase != 0 && k.phase != 1) {
      throw validation_error("allocation fault", k.name + ": phase must be 0 or 1");
    }
    const int64_t ops = k.m * k.k * k.n * k.instances;
    const int64_t resident = k.k * k.n * k.instances;
    if (ops % k.aies != 0 || resident % k.aies != 0) {
      throw validation_error("allocation fault", k.name + ": " + std::to_string(k.aies) +
                                                     " AIEs do not split the product evenly");
    }
    AieKernelEstimate r;
    r.name = k.name;
    r.aies = k.aies;
    r.ops_per_aie = ops / k.aies;
    r.bytes_per_aie = resident / k.aies;
    if (r.bytes_per_aie > kAieDataBytes) {
      const int64_t need = (resident + kAieDataBytes - 1) / kAieDataBytes;
      throw validation_error("allocation fault",
                             k.name + ": " + std::to_string(r.bytes_per_aie) +
                                 " bytes per AIE exceed the 32768-byte data memory; needs at least " +
                                 std::to_string(need) + " AIEs");
    }
    r.cycles = (r.ops_per_aie + kAieMultipliesPerCycle - 1) / kAieMultipliesPerCycle;
    r.latency_ns = r.cycles * 1'000'000'000 / kAieClockHz;
    r.latency_us = round_to(r.latency_ns, 1000) / 1000;
    e.total_aies += k.aies;
    phase_ns[k.phase] = std::max(phase_ns[k.phase], r.latency_us * 1000);
    e.kernels.push_back(r);
  }
  if (e.total_aies > kDeviceAies) {
    throw validation_error("device fault", std::to_string(e.total_aies) +
                                               " AIEs requested; the device has " +
                                               std::to_string(kDeviceAies));
  }
  e.matmul_ns = phase_ns[0] + phase_ns[1];
  e.encoder_ns = e.matmul_ns + alloc.nonlinear_ns;
  e.first_output_ns = round_to(e.encoder_ns * alloc.x_over_t_permille / 1000, 100);
  e.model_ns = e.encoder_ns + (e.layers - 1) * (e.first_output_ns + alloc.switch_ns);
  return e;
}

std::string versal_text(const VersalEstimate& e) {
  std::string out = pad("kernel", 10) + pad("AIEs", 6) + pad("ops/AIE", 12) + pad("cycles", 10) +
                    pad("us", 10) + pad("bytes/AIE", 11) + "\n";
  for (const AieKernelEstimate& k : e.kernels) {
    out += pad(k.name, 10) + pad(std::to_string(k.aies), 6) + pad(std::to_string(k.ops_per_aie), 12) +
           pad(std::to_string(k.cycles), 10) + pad(fmt("%.3f", k.latency_ns / 1e3), 10) +
           pad(std::to_string(k.bytes_per_aie), 11) + "\n";
  }
  out += "total AIEs per encoder: " + std::to_string(e.total_aies) + "\n";
  out += "encoder latency T: " + fmt("%.1f", e.encoder_ns / 1e3) + " us (matmul " +
         fmt("%.1f", e.matmul_ns / 1e3) + " us)\n";
  out += "first output X: " + fmt("%.1f", e.first_output_ns / 1e3) + " us\n";
  out += "model latency (L=" + std::to_string(e.layers) + "): " + fmt("%.1f", e.model_ns / 1e3) +
         " us\n";
  return out;
}

std::string versal_csv(const VersalEstimate& e) {
  std::string out = "kernel,aies,ops_per_aie,cycles,latency_ns,bytes_per_aie\n";
  for (const AieKernelEstimate& k : e.kernels) {
    out += k.name + "," + std::to_string(k.aies) + "," + std::to_string(k.ops_per_aie) + "," +
           std::to_string(k.cycles) + "," + std::to_string(k.latency_ns) + "," +
           std::to_string(k.bytes_per_aie) + "\n";
  }
  out += "total,aies," + std::to_string(e.total_aies) + "\n";
  out += "total,encoder_ns," + std::to_string(e.encoder_ns) + "\n";
  out += "total,first_output_ns," + std::to_string(e.first_output_ns) + "\n";
  out += "total,model_ns," + std::to_string(e.model_ns) + "\n";
  return out;
}

RoutingBound routing_state_bound(int64_t clusters, int64_t kernels_per_cluster) {
  if (clusters < 1 || clusters > 256 || kernels_per_cluster < 1 || kernels_per_cluster > 256) {
    throw validation_error("out of range", "clusters and kernels per cluster must be in 1..256");
  }
  return {kernels_per_cluster + clusters - 1, clusters * kernels_per_cluster};
}

std::string routing_text(int64_t clusters, int64_t kernels_per_cluster) {
  const RoutingBound b = routing_state_bound(clusters, kernels_per_cluster);
  return "clusters: " + std::to_string(clusters) + "\nkernels per cluster: " +
         std::to_string(kernels_per_cluster) + "\naddresses per node, gateway scheme: " +
         std::to_string(b.gateway) + "\naddresses per node, full mesh: " +
         std::to_string(b.full_mesh) + "\n";
}

}  // namespace gsim::perfmodel
