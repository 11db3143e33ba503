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

#include "builder/build.h"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "common/error.h"
#include "common/io.h"

namespace gsim::builder {

using fabric::NodeId;

namespace {

constexpr int kMaxIds = fabric::kMaxKernelsPerCluster;

struct ModuleRule {
  int inputs;
  const char* kind;  // model fs module kind, "" for none
};

const std::map<std::string, ModuleRule>& module_rules() {
  static const std::map<std::string, ModuleRule> rules = {
      {"source", {0, ""}},         {"sink", {1, ""}},
      {"linear_quant", {1, "linear"}}, {"linear_gelu", {1, "linear"}},
      {"attention", {3, "attention"}}, {"layernorm", {2, "layernorm"}}};
  return rules;
}

std::string role_of(const std::string& layer) {
  size_t dot = layer.rfind('.');
  return dot == std::string::npos ? layer : layer.substr(dot + 1);
}

bool pattern_matches(const std::string& pattern, const std::string& name) {
  if (!pattern.empty() && pattern.back() == '*') {
    return name.compare(0, pattern.size() - 1, pattern, 0, pattern.size() - 1) == 0;
  }
  return pattern == name;
}

// Destination of a kernel output before ids exist.
struct TRoute {
  enum Kind { kLocal, kForeign, kEgress } kind = kLocal;
  int temp = -1;  // kLocal: kernel index in the cluster
  int port = 0;
  int group = -1;  // kForeign: inbound group index
  uint32_t row_bytes = 0;
};

struct TKernel {
  PlanKernel k;
  enum Cat { kGateway, kCompute, kComm } cat = kCompute;
  std::string role, part;
  std::vector<TRoute> routes;
  std::vector<int> producers;  // per input port, local kernel index (-1 unwired)
  std::vector<int> members;    // GMI placement members
  bool gather_like = false;
  int node = -1;
};

// Stream entering a cluster from the host or another cluster.
struct TGroup {
  int cluster = 0;
  std::string label;
  std::vector<std::pair<int, int>> members;  // (kernel index, port)
  uint32_t row_bytes = 0;
  bool is_virtual = false;
  int byte = -1;
  std::vector<int> gateway_ports;
};

struct TCluster {
  std::vector<TKernel> kernels;
  std::vector<int> groups;
  int virtual_count = 0;
  std::vector<int> ids;  // kernel index -> id
};

struct LayerInfo {
  const LayerSpec* spec = nullptr;
  int cluster = -1;
  ModuleInfo module;
  uint32_t out_width = 0;
  std::vector<std::pair<int, int>> in_ports;  // logical input -> (kernel index, port)
  int out_kernel = -1;
  std::vector<int> inputs;                    // producer layer indices
  std::vector<std::pair<int, int>> consumers;  // (layer, port)
};

class Builder {
 public:
  Builder(const LayerDescription& ld, const ClusterDescription& cd, const FileSource& src)
      : ld_(ld), cd_(cd), src_(src) {}

  ClusterPlan run(const std::string& model_fs) {
    cfg_ = read_model_config(src_);
    check_clusters();
    parse_graph();
    assign_clusters();
    count_ids();
    read_modules();
    clusters_.assign(cd_.clusters, {});
    for (int c = 0; c < cd_.clusters; ++c) add_gateway(c);
    for (int l : order_) expand(l);
    wire_layer(sources_[0]);
    for (int l : order_) wire_layer(l);
    for (int c = 0; c < cd_.clusters; ++c) wire_gateway(c);
    assign_ids();
    map_nodes();
    return emit(model_fs);
  }

 private:
  // ---- descriptions --------------------------------------------------

  void check_clusters() {
    if (cd_.clusters < 1) throw validation_error("config fault", "at least one cluster is required");
    if (cd_.clusters > fabric::kMaxClusters) {
      throw validation_error("cluster limit", std::to_string(cd_.clusters) +
                                                  " clusters requested; at most 256 clusters "
                                                  "are supported");
    }
    if (cd_.nodes_per_cluster < 1) {
      throw validation_error("config fault", "nodes_per_cluster must be >= 1");
    }
    if (cd_.gmi_placement != "auto" && cd_.gmi_placement != "sender" &&
        cd_.gmi_placement != "receiver") {
      throw validation_error("malformed field",
                             "gmi_placement must be auto, sender or receiver");
    }
    for (const auto& [key, node] : cd_.placement) {
      if (node < 0 || node >= cd_.nodes_per_cluster) {
        throw validation_error("config fault", "placement '" + key + "' names node " +
                                                   std::to_string(node) + " outside 0.." +
                                                   std::to_string(cd_.nodes_per_cluster - 1));
      }
    }
  }

  void parse_graph() {
    std::map<std::string, int> index;
    for (size_t i = 0; i < ld_.layers.size(); ++i) {
      const LayerSpec& s = ld_.layers[i];
      if (!index.emplace(s.name, static_cast<int>(i)).second) {
        throw validation_error("malformed field", "layer '" + s.name + "' defined twice");
      }
      auto rule = module_rules().find(s.module);
      if (rule == module_rules().end()) {
        throw validation_error("unknown module", "layer '" + s.name + "' uses module '" +
                                                     s.module + "'");
      }
      if (static_cast<int>(s.inputs.size()) != rule->second.inputs) {
        throw validation_error("config fault",
                               "layer '" + s.name + "' (" + s.module + ") takes " +
                                   std::to_string(rule->second.inputs) + " inputs, got " +
                                   std::to_string(s.inputs.size()));
      }
      if (s.column_partitions < 1) {
        throw validation_error("config fault", "layer '" + s.name + "': column_partitions < 1");
      }
      if (s.column_partitions > 1 && s.module.rfind("linear", 0) != 0) {
        throw validation_error("config fault",
                               "layer '" + s.name + "': only Linear layers can be partitioned");
      }
    }
    layers_.resize(ld_.layers.size());
    for (size_t i = 0; i < ld_.layers.size(); ++i) {
      const LayerSpec& s = ld_.layers[i];
      layers_[i].spec = &s;
      for (size_t p = 0; p < s.inputs.size(); ++p) {
        auto it = index.find(s.inputs[p]);
        if (it == index.end()) {
          throw validation_error("config fault", "layer '" + s.name + "' reads unknown layer '" +
                                                     s.inputs[p] + "'");
        }
        if (ld_.layers[it->second].module == "sink") {
          throw validation_error("config fault", "layer '" + s.name + "' reads the sink");
        }
        layers_[i].inputs.push_back(it->second);
        layers_[it->second].consumers.push_back({static_cast<int>(i), static_cast<int>(p)});
      }
      if (s.module == "source") sources_.push_back(static_cast<int>(i));
      if (s.module == "sink") sinks_.push_back(static_cast<int>(i));
    }
    if (sources_.size() != 1 || sinks_.size() != 1) {
      throw validation_error("config fault", "exactly one source and one sink layer are required");
    }
    // Kahn's algorithm, stable in description order.
    std::vector<int> indegree(layers_.size());
    for (size_t i = 0; i < layers_.size(); ++i) indegree[i] = static_cast<int>(layers_[i].inputs.size());
    std::set<int> ready;
    for (size_t i = 0; i < layers_.size(); ++i) {
      if (indegree[i] == 0) ready.insert(static_cast<int>(i));
    }
    std::vector<int> topo;
    while (!ready.empty()) {
      int l = *ready.begin();
      ready.erase(ready.begin());
      topo.push_back(l);
      for (auto [c, port] : layers_[l].consumers) {
        if (--indegree[c] == 0) ready.insert(c);
      }
    }
    if (topo.size() != layers_.size()) {
      std::string stuck;
      for (size_t i = 0; i < layers_.size(); ++i) {
        if (indegree[i] > 0) stuck += (stuck.empty() ? "" : ", ") + ld_.layers[i].name;
      }
      throw validation_error("cyclic layer graph", "layers on a cycle or behind one: " + stuck);
    }
    for (size_t i = 0; i < layers_.size(); ++i) {
      if (i != size_t(sources_[0]) && layers_[i].spec->module != "sink" &&
          layers_[i].consumers.empty()) {
        throw validation_error("config fault", "layer '" + ld_.layers[i].name +
                                                   "' has no consumer");
      }
    }
    // Expansion follows description order, which fixes the id order.
    for (size_t i = 0; i < layers_.size(); ++i) {
      const std::string& m = layers_[i].spec->module;
      if (m != "source" && m != "sink") order_.push_back(static_cast<int>(i));
    }
  }

  void assign_clusters() {
    if (cd_.assignment.empty() && cd_.clusters == 1) {
      for (int l : order_) layers_[l].cluster = 0;
    } else {
      for (const Assignment& a : cd_.assignment) {
        if (a.cluster < 0 || a.cluster >= cd_.clusters) {
          throw validation_error("config fault", "assignment names cluster " +
                                                     std::to_string(a.cluster) + " of " +
                                                     std::to_string(cd_.clusters));
        }
      }
      for (int l : order_) {
        const std::string& name = layers_[l].spec->name;
        for (const Assignment& a : cd_.assignment) {
          for (const std::string& pat : a.layers) {
            if (!pattern_matches(pat, name)) continue;
            if (layers_[l].cluster >= 0 && layers_[l].cluster != a.cluster) {
              throw validation_error("config fault", "layer '" + name +
                                                         "' is assigned to clusters " +
                                                         std::to_string(layers_[l].cluster) +
                                                         " and " + std::to_string(a.cluster));
            }
            layers_[l].cluster = a.cluster;
          }
        }
        if (layers_[l].cluster < 0) {
          throw validation_error("config fault", "layer '" + name + "' is not assigned");
        }
      }
    }
    std::vector<int> used(cd_.clusters);
    for (int l : order_) used[layers_[l].cluster] = 1;
    for (int c = 0; c < cd_.clusters; ++c) {
      if (!used[c]) throw validation_error("config fault", "cluster " + std::to_string(c) + " has no layers");
    }
    std::set<int> input_clusters;
    for (auto [c, port] : layers_[sources_[0]].consumers) {
      if (ld_.layers[c].module == "sink") {
        throw validation_error("config fault", "the source feeds the sink directly");
      }
      input_clusters.insert(layers_[c].cluster);
    }
    if (input_clusters.size() != 1) {
      throw validation_error("config fault", "the source must feed a single cluster");
    }
  }

  // Kernel ids each cluster needs: gateway, layer kernels, fan-out
  // broadcasts and virtual kernels.
  void count_ids() {
    std::vector<int64_t> ids(cd_.clusters, 1);
    auto layer_ids = [&](const LayerInfo& li) -> int64_t {
      const std::string& m = li.spec->module;
      if (m == "attention") return 2 * int64_t(cfg_.heads) + 4;
      if (m == "layernorm") return 1;
      const int p = li.spec->column_partitions;
      return p + (p > 1 ? 2 : 0);
    };
    for (int l : order_) ids[layers_[l].cluster] += layer_ids(layers_[l]);
    for (size_t l = 0; l < layers_.size(); ++l) {
      const int own = l == size_t(sources_[0]) ? -1 : layers_[l].cluster;
      std::map<int, int> foreign;
      int dests = 0;
      for (auto [c, port] : layers_[l].consumers) {
        const int cc = ld_.layers[c].module == "sink" ? -2 : layers_[c].cluster;
        if (cc == own || cc == -2) {
          ++dests;
        } else if (foreign[cc]++ == 0) {
          ++dests;
        }
      }
      if (own >= 0 && dests > 1) ++ids[own];
      for (auto [cc, n] : foreign) {
        if (n > 1) ++ids[cc];  // one virtual broadcast
      }
    }
    for (int c = 0; c < cd_.clusters; ++c) {
      if (ids[c] > kMaxIds) {
        throw validation_error("kernel limit", "cluster " + std::to_string(c) + " needs " +
                                                   std::to_string(ids[c]) +
                                                   " kernel ids; a cluster supports at most "
                                                   "256 kernels");
      }
    }
  }

  void read_modules() {
    for (int l : order_) {
      LayerInfo& li = layers_[l];
      const LayerSpec& s = *li.spec;
      const char* kind = module_rules().at(s.module).kind;
      if (s.params.empty()) {
        throw validation_error("missing field", "layer '" + s.name + "' names no params module");
      }
      li.module = read_module_info(src_, s.params);
      if (li.module.kind != kind) {
        throw validation_error("shape mismatch", "layer '" + s.name + "': " + s.params + " is a " +
                                                     li.module.kind + " module, expected " + kind);
      }
      li.out_width = static_cast<uint32_t>(li.module.out_dim);
    }
    layers_[sources_[0]].out_width = static_cast<uint32_t>(cfg_.hidden);
    for (int l : order_) {
      LayerInfo& li = layers_[l];
      const LayerSpec& s = *li.spec;
      for (size_t p = 0; p < li.inputs.size(); ++p) {
        const uint32_t w = layers_[li.inputs[p]].out_width;
        if (w != static_cast<uint32_t>(li.module.in_dim)) {
          throw validation_error("shape mismatch", "layer '" + s.name + "' input " +
                                                       std::to_string(p) + " is " +
                                                       std::to_string(w) + " wide, " + s.params +
                                                       " expects " +
                                                       std::to_string(li.module.in_dim));
        }
      }
      if (s.module == "attention") {
        if (li.module.heads != cfg_.heads) {
          throw validation_error("shape mismatch", s.params + " has " +
                                                       std::to_string(li.module.heads) +
                                                       " heads, the model has " +
                                                       std::to_string(cfg_.heads));
        }
        for (int p = 0; p < 3; ++p) {
          if (layers_[li.inputs[p]].spec->params.empty()) {
            throw validation_error("config fault", "attention '" + s.name +
                                                       "' needs parameterized Q/K/V producers");
          }
        }
        if (s.hw.num_pe < 1) throw validation_error("config fault", s.name + ": num_pe < 1");
      }
      if (s.column_partitions > li.module.out_dim) {
        throw validation_error("config fault", "layer '" + s.name + "' splits " +
                                                   std::to_string(li.module.out_dim) +
                                                   " columns into " +
                                                   std::to_string(s.column_partitions) + " parts");
      }
      if (s.module.rfind("linear", 0) == 0 && (s.hw.tiles < 1 || s.hw.pes < 1)) {
        throw validation_error("config fault", s.name + ": tiles and pes must be >= 1");
      }
    }
    const LayerInfo& sink = layers_[sinks_[0]];
    if (layers_[sink.inputs[0]].out_width != static_cast<uint32_t>(cfg_.hidden)) {
      throw validation_error("shape mismatch", "the sink expects hidden-size rows");
    }
  }

  // ---- kernels -------------------------------------------------------

  int add_kernel(int c, TKernel k) {
    clusters_[c].kernels.push_back(std::move(k));
    return static_cast<int>(clusters_[c].kernels.size()) - 1;
  }

  TKernel make(const LayerInfo* li, TKernel::Cat cat, const std::string& op,
               const std::string& part, int inputs) {
    TKernel t;
    t.cat = cat;
    t.k.op = op;
    t.k.kind = cat == TKernel::kCompute ? "compute" : cat == TKernel::kComm ? "gmi" : "gateway";
    if (li) {
      t.k.layer = li->spec->name;
      t.role = role_of(li->spec->name);
      t.k.label = part.empty() ? li->spec->name : li->spec->name + "/" + part;
    }
    t.part = part;
    t.k.inputs.resize(inputs);
    t.producers.assign(inputs, -1);
    return t;
  }

  void add_gateway(int c) {
    TKernel g = make(nullptr, TKernel::kGateway, "gateway", "", 1);
    g.k.label = "cluster_" + std::to_string(c) + ".gateway";
    g.role = "gateway";
    add_kernel(c, std::move(g));
  }

  void connect(int c, int from, TRoute r) {
    clusters_[c].kernels[from].routes.push_back(r);
    if (r.kind == TRoute::kLocal) {
      TKernel& to = clusters_[c].kernels[r.temp];
      to.producers[r.port] = from;
      to.k.inputs[r.port].row_bytes = r.row_bytes;
      to.k.inputs[r.port].from = clusters_[c].kernels[from].k.label;
    }
  }

  static TRoute local(int temp, int port, uint32_t row_bytes) {
    TRoute r;
    r.temp = temp;
    r.port = port;
    r.row_bytes = row_bytes;
    return r;
  }

  static gmi::GmiKernelSpec spec_of(gmi::GmiOp op, size_t chunk = 0) {
    gmi::GmiKernelSpec s;
    s.op = op;
    s.chunk_bytes = chunk;
    return s;
  }

  void expand(int l) {
    LayerInfo& li = layers_[l];
    const LayerSpec& s = *li.spec;
    const int c = li.cluster;
    const uint32_t h = static_cast<uint32_t>(li.module.in_dim);
    if (s.module == "linear_quant" || s.module == "linear_gelu") {
      const int parts = s.column_partitions;
      const int cols = li.module.out_dim;
      std::vector<int> ks;
      for (int i = 0; i < parts; ++i) {
        TKernel t = make(&li, TKernel::kCompute, s.module, parts > 1 ? std::to_string(i) : "", 1);
        t.k.params = s.params;
        t.k.col_begin = int(int64_t(cols) * i / parts);
        t.k.col_end = int(int64_t(cols) * (i + 1) / parts);
        t.k.hw = s.hw;
        const int w = t.k.col_end - t.k.col_begin;
        t.k.weight = s.weight ? *s.weight / parts : double(h) * w;
        ks.push_back(add_kernel(c, std::move(t)));
      }
      if (parts == 1) {
        li.in_ports = {{ks[0], 0}};
        li.out_kernel = ks[0];
        return;
      }
      TKernel split = make(&li, TKernel::kComm, "broadcast", "split", 1);
      split.k.gmi = spec_of(gmi::GmiOp::kBroadcast);
      split.members = ks;
      const int sp = add_kernel(c, std::move(split));
      TKernel gather = make(&li, TKernel::kComm, "gather", "gather", parts);
      gather.k.gmi = spec_of(gmi::GmiOp::kGather);
      gather.members = ks;
      gather.gather_like = true;
      const int ga = add_kernel(c, std::move(gather));
      for (int i = 0; i < parts; ++i) {
        connect(c, sp, local(ks[i], 0, h));
        const PlanKernel& k = clusters_[c].kernels[ks[i]].k;
        connect(c, ks[i], local(ga, i, static_cast<uint32_t>(k.col_end - k.col_begin)));
      }
      li.in_ports = {{sp, 0}};
      li.out_kernel = ga;
      return;
    }
    if (s.module == "layernorm") {
      TKernel t = make(&li, TKernel::kCompute, "layernorm", "", 2);
      t.k.params = s.params;
      t.k.hw = s.hw;
      t.k.weight = s.weight ? *s.weight : double(h);
      const int k = add_kernel(c, std::move(t));
      li.in_ports = {{k, 0}, {k, 1}};
      li.out_kernel = k;
      return;
    }
    // attention
    const int heads = li.module.heads;
    const uint32_t dh = h / heads;
    const uint32_t m = static_cast<uint32_t>(cfg_.max_seq);
    const std::string qp = layers_[li.inputs[0]].spec->params;
    const std::string kp = layers_[li.inputs[1]].spec->params;
    const std::string vp = layers_[li.inputs[2]].spec->params;
    std::vector<int> scores, context;
    for (int i = 0; i < heads; ++i) {
      TKernel t = make(&li, TKernel::kCompute, "attention_scores", "scores/" + std::to_string(i), 2);
      t.part = "scores";
      t.k.params = s.params;
      t.k.aux = {qp, kp};
      t.k.head = i;
      t.k.hw = s.hw;
      t.k.weight = s.weight ? *s.weight / (2 * heads) : double(dh) * m;
      scores.push_back(add_kernel(c, std::move(t)));
    }
    for (int i = 0; i < heads; ++i) {
      TKernel t = make(&li, TKernel::kCompute, "softmax_matmul", "context/" + std::to_string(i), 2);
      t.part = "context";
      t.k.params = s.params;
      t.k.aux = {vp};
      t.k.head = i;
      t.k.hw = s.hw;
      t.k.weight = s.weight ? *s.weight / (2 * heads) : double(dh) * m;
      context.push_back(add_kernel(c, std::move(t)));
    }
    const char* names[3] = {"scatter_q", "scatter_k", "scatter_v"};
    int scatter[3];
    for (int p = 0; p < 3; ++p) {
      TKernel t = make(&li, TKernel::kComm, "scatter", names[p], 1);
      t.k.gmi = spec_of(gmi::GmiOp::kScatter, dh);
      t.members = p == 2 ? context : scores;
      scatter[p] = add_kernel(c, std::move(t));
    }
    TKernel g = make(&li, TKernel::kComm, "gather", "gather", heads);
    g.k.gmi = spec_of(gmi::GmiOp::kGather);
    g.members = context;
    g.gather_like = true;
    const int ga = add_kernel(c, std::move(g));
    for (int i = 0; i < heads; ++i) {
      connect(c, scatter[0], local(scores[i], 0, dh));
      connect(c, scatter[1], local(scores[i], 1, dh));
      connect(c, scatter[2], local(context[i], 1, dh));
      connect(c, scores[i], local(context[i], 0, m));
      connect(c, context[i], local(ga, i, dh));
    }
    li.in_ports = {{scatter[0], 0}, {scatter[1], 0}, {scatter[2], 0}};
    li.out_kernel = ga;
  }

  int new_group(int c, const std::string& label, uint32_t row_bytes) {
    TGroup g;
    g.cluster = c;
    g.label = label;
    g.row_bytes = row_bytes;
    groups_.push_back(std::move(g));
    const int id = static_cast<int>(groups_.size()) - 1;
    clusters_[c].groups.push_back(id);
    return id;
  }

  // Producer side of a layer output: one destination is wired directly,
  // several go through a broadcast kernel. Consumers in another cluster
  // form one inbound group per cluster.
  void wire_layer(int l) {
    LayerInfo& li = layers_[l];
    const bool is_source = l == sources_[0];
    const uint32_t w = li.out_width;
    std::vector<TRoute> dests;
    std::map<int, int> foreign;  // cluster -> group
    for (auto [cl, port] : li.consumers) {
      if (ld_.layers[cl].module == "sink") {
        TRoute r;
        r.kind = TRoute::kEgress;
        r.row_bytes = w;
        dests.push_back(r);
        output_layer_ = l;
        continue;
      }
      const LayerInfo& con = layers_[cl];
      auto [temp, tport] = con.in_ports[port];
      if (!is_source && con.cluster == li.cluster) {
        dests.push_back(local(temp, tport, w));
        continue;
      }
      auto it = foreign.find(con.cluster);
      if (it == foreign.end()) {
        const std::string label = (is_source ? std::string("host") : li.spec->name) + "->" +
                                  std::to_string(con.cluster);
        it = foreign.emplace(con.cluster, new_group(con.cluster, label, w)).first;
        TRoute r;
        r.kind = TRoute::kForeign;
        r.group = it->second;
        r.row_bytes = w;
        dests.push_back(r);
      }
      groups_[it->second].members.push_back({temp, tport});
    }
    if (is_source) {
      input_group_ = dests.at(0).group;
      return;
    }
    const int c = li.cluster;
    if (dests.size() == 1) {
      connect(c, li.out_kernel, dests[0]);
      return;
    }
    TKernel b = make(&li, TKernel::kComm, "broadcast", "fanout", 1);
    b.k.gmi = spec_of(gmi::GmiOp::kBroadcast);
    for (const TRoute& d : dests) {
      if (d.kind == TRoute::kLocal) b.members.push_back(d.temp);
    }
    const int bk = add_kernel(c, std::move(b));
    connect(c, li.out_kernel, local(bk, 0, w));
    for (const TRoute& d : dests) connect(c, bk, d);
  }

  void wire_gateway(int c) {
    TCluster& cl = clusters_[c];
    std::set<int> forwarded;
    for (int gi : cl.groups) {
      TGroup& g = groups_[gi];
      const bool single = g.members.size() == 1;
      if (single && forwarded.insert(g.members[0].first).second) {
        g.is_virtual = false;
      } else {
        g.is_virtual = true;
        ++cl.virtual_count;
      }
      for (auto [temp, port] : g.members) {
        g.gateway_ports.push_back(static_cast<int>(cl.kernels[0].routes.size()));
        connect(c, 0, local(temp, port, g.row_bytes));
      }
    }
  }

  void assign_ids() {
    for (int c = 0; c < cd_.clusters; ++c) {
      TCluster& cl = clusters_[c];
      cl.ids.assign(cl.kernels.size(), -1);
      int next = 0;
      cl.ids[0] = next++;
      for (size_t i = 0; i < cl.kernels.size(); ++i) {
        if (cl.kernels[i].cat == TKernel::kCompute) cl.ids[i] = next++;
      }
      for (int gi : cl.groups) {
        if (groups_[gi].is_virtual) groups_[gi].byte = next++;
      }
      for (size_t i = 0; i < cl.kernels.size(); ++i) {
        if (cl.kernels[i].cat == TKernel::kComm) cl.ids[i] = next++;
      }
      for (int gi : cl.groups) {
        if (!groups_[gi].is_virtual) groups_[gi].byte = cl.ids[groups_[gi].members[0].first];
      }
      if (next > kMaxIds) {
        throw validation_error("kernel limit", "cluster " + std::to_string(c) + " needs " +
                                                   std::to_string(next) +
                                                   " kernel ids; a cluster supports at most "
                                                   "256 kernels");
      }
    }
  }

  // ---- node mapping ----------------------------------------------------

  std::optional<int> placement_for(const TKernel& t) const {
    std::vector<std::string> keys = {t.k.label};
    if (!t.part.empty()) {
      const std::string tail = t.k.label.substr(t.k.layer.size());  // "/scores/3"
      keys.push_back(t.role + tail);
      keys.push_back(t.role + "/" + t.part);
    }
    keys.push_back(t.role);
    for (const std::string& key : keys) {
      auto it = cd_.placement.find(key);
      if (it != cd_.placement.end()) return it->second;
    }
    return std::nullopt;
  }

  int resolve(int c, int i, std::vector<int>& state) {
    TCluster& cl = clusters_[c];
    TKernel& t = cl.kernels[i];
    if (t.node >= 0) return t.node;
    if (state[i] == 1) return -1;  // on the current resolution path
    state[i] = 1;
    std::set<int> member_nodes;
    bool known = true;
    for (int m : t.members) {
      int n = resolve(c, m, state);
      if (n < 0) known = false;
      member_nodes.insert(n);
    }
    const bool shared = known && member_nodes.size() == 1;
    const int first_member = t.members.empty() ? -1 : resolve(c, t.members[0], state);
    int producer = -1;
    for (int p : t.producers) {
      if (p >= 0) {
        producer = resolve(c, p, state);
        if (producer >= 0) break;
      }
    }
    int consumer = -1;
    for (const TRoute& r : t.routes) {
      if (r.kind == TRoute::kLocal) {
        consumer = resolve(c, r.temp, state);
        break;
      }
    }
    const std::string& mode = cd_.gmi_placement;
    int node = -1;
    bool receiver = true;
    if (t.gather_like) {
      // Members send; the consumer receives.
      if (mode == "receiver" || (mode == "auto" && !shared)) {
        node = consumer >= 0 ? consumer : first_member;
      } else {
        node = first_member;
        receiver = false;
      }
    } else {
      if (mode == "sender" || (mode == "auto" && !shared)) {
        node = producer;
        receiver = false;
      } else {
        node = first_member;
      }
    }
    if (node < 0) node = producer >= 0 ? producer : first_member;
    if (node < 0) node = 0;
    t.k.gmi->placement = receiver ? gmi::Placement::kReceiverSide : gmi::Placement::kSenderSide;
    state[i] = 2;
    t.node = node;
    return node;
  }

  void map_nodes() {
    const int npc = cd_.nodes_per_cluster;
    for (int c = 0; c < cd_.clusters; ++c) {
      TCluster& cl = clusters_[c];
      std::vector<double> load(npc, 0.0);
      std::vector<int> unplaced;
      for (size_t i = 0; i < cl.kernels.size(); ++i) {
        TKernel& t = cl.kernels[i];
        if (t.cat == TKernel::kComm) continue;
        if (auto n = placement_for(t)) {
          t.node = *n;
          load[t.node] += t.k.weight;
        } else if (t.cat == TKernel::kGateway) {
          t.node = 0;
        } else {
          unplaced.push_back(static_cast<int>(i));
        }
      }
      // Greedy longest-processing-time bin packing.
      std::stable_sort(unplaced.begin(), unplaced.end(), [&](int a, int b) {
        return cl.kernels[a].k.weight > cl.kernels[b].k.weight;
      });
      for (int i : unplaced) {
        int best = static_cast<int>(std::min_element(load.begin(), load.end()) - load.begin());
        cl.kernels[i].node = best;
        load[best] += cl.kernels[i].k.weight;
      }
      for (size_t i = 0; i < cl.kernels.size(); ++i) {
        TKernel& t = cl.kernels[i];
        if (t.cat == TKernel::kComm) {
          if (auto n = placement_for(t)) t.node = *n;
        }
      }
      std::vector<int> state(cl.kernels.size(), 0);
      for (size_t i = 0; i < cl.kernels.size(); ++i) {
        if (cl.kernels[i].cat == TKernel::kComm) {
          TKernel& t = cl.kernels[i];
          if (t.node >= 0) {
            // Explicitly placed: record the side it ended up on.
            bool with_members = !t.members.empty();
            for (int m : t.members) with_members &= cl.kernels[m].node == t.node;
            t.k.gmi->placement = with_members != t.gather_like ? gmi::Placement::kReceiverSide
                                                               : gmi::Placement::kSenderSide;
          } else {
            resolve(c, static_cast<int>(i), state);
          }
        }
      }
    }
  }

  // ---- emission --------------------------------------------------------

  NodeId node_id(int c, int local_node) const {
    return static_cast<NodeId>(c * cd_.nodes_per_cluster + local_node);
  }

  ClusterPlan emit(const std::string& model_fs) {
    ClusterPlan p;
    p.model_fs = model_fs;
    p.cfg = cfg_;
    p.nodes_per_cluster = cd_.nodes_per_cluster;
    p.network = cd_.network;
    const uint64_t m = static_cast<uint64_t>(cfg_.max_seq);
    for (int c = 0; c < cd_.clusters; ++c) {
      TCluster& cl = clusters_[c];
      PlanCluster pc;
      pc.id = c;
      // Gateway input: the widest inbound row plus its GMI byte.
      uint32_t gw_row = 0;
      for (int gi : cl.groups) gw_row = std::max(gw_row, groups_[gi].row_bytes + 1);
      TKernel& gw = cl.kernels[0];
      gw.k.inputs[0].row_bytes = gw_row;
      gw.k.inputs[0].from = "network";
      for (size_t i = 0; i < cl.kernels.size(); ++i) {
        TKernel& t = cl.kernels[i];
        PlanKernel k = t.k;
        k.id = cl.ids[i];
        k.node = node_id(c, t.node);
        for (PlanInput& in : k.inputs) in.capacity = m * in.row_bytes;
        for (const TRoute& r : t.routes) {
          runtime::Route out;
          if (r.kind == TRoute::kEgress) {
            out.egress = true;
          } else if (r.kind == TRoute::kForeign) {
            out.cluster = groups_[r.group].cluster;
            out.kernel = 0;
            out.port = 0;
            out.gmi = groups_[r.group].byte;
          } else {
            out.cluster = c;
            out.kernel = cl.ids[r.temp];
            out.port = r.port;
          }
          k.outputs.push_back(out);
        }
        if (k.gmi) {
          for (int mi : t.members) {
            fabric::KernelAddress a{uint8_t(c), uint8_t(cl.ids[mi])};
            if (std::find(k.gmi->group.begin(), k.gmi->group.end(), a) == k.gmi->group.end()) {
              k.gmi->group.push_back(a);
            }
          }
        }
        if (t.cat == TKernel::kCompute) {
          pc.compute_ids.push_back(k.id);
        } else if (t.cat == TKernel::kComm) {
          pc.communication_ids.push_back(k.id);
        } else {
          pc.communication_ids.push_back(k.id);
          for (int gi : cl.groups) {
            const TGroup& g = groups_[gi];
            if (g.is_virtual) {
              PlanVirtual v;
              v.id = g.byte;
              v.label = g.label;
              v.op = gmi::GmiOp::kBroadcast;
              v.ports = g.gateway_ports;
              pc.virtuals.push_back(std::move(v));
              pc.virtual_ids.push_back(g.byte);
            } else {
              k.forwarding.push_back({g.byte, g.gateway_ports[0]});
            }
          }
        }
        pc.kernels.push_back(std::move(k));
      }
      std::sort(pc.kernels.begin(), pc.kernels.end(),
                [](const PlanKernel& a, const PlanKernel& b) { return a.id < b.id; });
      std::sort(pc.communication_ids.begin(), pc.communication_ids.end());
      p.clusters.push_back(std::move(pc));
    }

    // One switch per cluster, chained in cluster order.
    const int nc = cd_.clusters;
    for (int c = 0; c < nc; ++c) {
      const std::string sw = "sw" + std::to_string(c);
      p.topology.switches.push_back(sw);
      if (c > 0) p.topology.links.push_back({"sw" + std::to_string(c - 1), sw});
      for (int i = 0; i < cd_.nodes_per_cluster; ++i) p.topology.attachments[node_id(c, i)] = sw;
    }
    const TGroup& in = groups_[input_group_];
    const LayerInfo& out = layers_[output_layer_];
    p.host.input_cluster = in.cluster;
    p.host.input_gmi = in.byte;
    p.host.input_row_bytes = in.row_bytes;
    p.host.ingress = node_id(nc, 0);
    p.host.egress = node_id(nc, 0) + 1;
    p.host.output_cluster = out.cluster;
    p.host.output_kernel = clusters_[out.cluster].ids[out.out_kernel];
    // A fan-out broadcast may sit between the output kernel and the host.
    for (const PlanKernel& k : p.clusters[out.cluster].kernels) {
      for (const runtime::Route& r : k.outputs) {
        if (r.egress) p.host.output_kernel = k.id;
      }
    }
    p.host.output_row_bytes = out.out_width;
    p.host.output_params = out.spec->params;
    p.topology.attachments[p.host.ingress] = "sw" + std::to_string(in.cluster);
    p.topology.attachments[p.host.egress] = "sw" + std::to_string(out.cluster);

    // Local table: every physical kernel of the node's cluster. Gateway
    // table: kernel 0 of every other cluster.
    for (int c = 0; c < nc; ++c) {
      fabric::RoutingTables base;
      base.cluster = static_cast<uint8_t>(c);
      for (const PlanKernel& k : p.clusters[c].kernels) base.local[uint8_t(k.id)] = k.node;
      for (int o = 0; o < nc; ++o) {
        if (o != c) base.gateways[uint8_t(o)] = p.clusters[o].kernels[0].node;
      }
      for (int i = 0; i < cd_.nodes_per_cluster; ++i) p.routing[node_id(c, i)] = base;
    }
    std::vector<std::string> violations = validate(p);
    if (!violations.empty()) {
      std::string all;
      for (const std::string& v : violations) all += "\n  " + v;
      throw validation_error("invalid plan", std::to_string(violations.size()) +
                                                 " violation(s):" + all);
    }
    return p;
  }

  const LayerDescription& ld_;
  const ClusterDescription& cd_;
  const FileSource& src_;
  ibert::EncoderConfig cfg_;
  std::vector<LayerInfo> layers_;
  std::vector<int> order_, sources_, sinks_;
  std::vector<TCluster> clusters_;
  std::vector<TGroup> groups_;
  int input_group_ = -1;
  int output_layer_ = -1;
};

}  // namespace

ClusterPlan build(const LayerDescription& layers, const ClusterDescription& clusters,
                  const std::string& model_fs, const FileSource& source) {
  return Builder(layers, clusters, source).run(model_fs);
}

ClusterPlan build(const LayerDescription& layers, const ClusterDescription& clusters,
                  const std::filesystem::path& model_fs) {
  return build(layers, clusters, model_fs.string(), directory_source(model_fs));
}

}  // namespace gsim::builder

namespace gsim::builder {

namespace {

std::string addr(int cluster, int kernel) {
  return std::to_string(cluster) + "." + std::to_string(kernel);
}

}  // namespace

std::vector<std::string> validate(const ClusterPlan& plan) {
  std::vector<std::string> v;
  const int nc = static_cast<int>(plan.clusters.size());
  if (nc < 1) return {"plan has no clusters"};
  if (nc > fabric::kMaxClusters) {
    v.push_back(std::to_string(nc) + " clusters exceed the limit of 256");
  }
  std::map<int, const PlanCluster*> by_id;
  for (const PlanCluster& c : plan.clusters) {
    if (!by_id.emplace(c.id, &c).second) v.push_back("cluster " + std::to_string(c.id) + " listed twice");
  }
  size_t max_kernels = 0;
  std::set<int> inbound;  // clusters receiving inter-cluster traffic
  inbound.insert(plan.host.input_cluster);

  for (const PlanCluster& c : plan.clusters) {
    const std::string cl = "cluster " + std::to_string(c.id);
    // Contiguous, disjoint id classes.
    std::vector<int> all;
    all.insert(all.end(), c.compute_ids.begin(), c.compute_ids.end());
    all.insert(all.end(), c.communication_ids.begin(), c.communication_ids.end());
    all.insert(all.end(), c.virtual_ids.begin(), c.virtual_ids.end());
    std::sort(all.begin(), all.end());
    for (size_t i = 0; i < all.size(); ++i) {
      if (all[i] != static_cast<int>(i)) {
        v.push_back(cl + ": kernel ids are not a disjoint contiguous range 0.." +
                    std::to_string(all.size() - 1));
        break;
      }
    }
    if (all.size() > size_t(fabric::kMaxKernelsPerCluster)) {
      v.push_back(cl + ": " + std::to_string(all.size()) + " kernel ids exceed the limit of 256");
    }
    std::set<int> physical(c.compute_ids.begin(), c.compute_ids.end());
    physical.insert(c.communication_ids.begin(), c.communication_ids.end());
    std::set<int> listed;
    for (const PlanKernel& k : c.kernels) listed.insert(k.id);
    if (listed != physical || listed.size() != c.kernels.size()) {
      v.push_back(cl + ": kernel list does not match the compute and communication ids");
    }
    std::set<int> virt;
    for (const PlanVirtual& pv : c.virtuals) virt.insert(pv.id);
    if (virt != std::set<int>(c.virtual_ids.begin(), c.virtual_ids.end())) {
      v.push_back(cl + ": virtual kernels do not match the virtual ids");
    }
    max_kernels = std::max(max_kernels, c.kernels.size());
    for (const PlanKernel& k : c.kernels) {
      if (k.gmi) {
        for (const std::string& e : gmi::check_spec(*k.gmi)) {
          v.push_back(addr(c.id, k.id) + " (" + k.label + "): " + e);
        }
      }
      for (const runtime::Route& r : k.outputs) {
        if (!r.egress && r.cluster != c.id) inbound.insert(r.cluster);
      }
    }
  }

  for (const PlanCluster& c : plan.clusters) {
    if (!inbound.count(c.id)) continue;
    const PlanKernel* g = c.find(0);
    if (!g || g->kind != "gateway") {
      v.push_back("cluster " + std::to_string(c.id) +
                  " receives inter-cluster traffic but kernel 0 is not its gateway");
    }
  }

  // Bytes a gateway understands: forwarding entries and virtual kernels.
  auto gateway_knows = [&](int cluster, int byte) {
    auto it = by_id.find(cluster);
    if (it == by_id.end()) return false;
    const PlanKernel* g = it->second->find(0);
    if (!g || g->kind != "gateway") return false;
    for (auto [b, port] : g->forwarding) {
      if (b == byte) return true;
    }
    for (const PlanVirtual& pv : it->second->virtuals) {
      if (pv.id == byte) return true;
    }
    return false;
  };

  const uint64_t m = static_cast<uint64_t>(plan.cfg.max_seq);
  std::map<std::pair<int, int>, std::vector<int>> producers;  // (cluster, kernel) -> per port
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edges;
  for (const PlanCluster& c : plan.clusters) {
    for (const PlanKernel& k : c.kernels) producers[{c.id, k.id}].assign(k.inputs.size(), 0);
  }
  bool egress_seen = false;
  for (const PlanCluster& c : plan.clusters) {
    for (const PlanKernel& k : c.kernels) {
      const std::string from = addr(c.id, k.id) + " (" + k.label + ")";
      for (size_t o = 0; o < k.outputs.size(); ++o) {
        const runtime::Route& r = k.outputs[o];
        if (r.egress) {
          egress_seen |= c.id == plan.host.output_cluster && k.id == plan.host.output_kernel;
          continue;
        }
        if (r.cluster != c.id) {
          if (r.kernel != 0) {
            v.push_back("inter-cluster edge bypasses gateway: " + from + " -> " +
                        addr(r.cluster, r.kernel));
            continue;
          }
          if (r.gmi < 0 || r.gmi > 255) {
            v.push_back(from + " -> " + addr(r.cluster, 0) + ": inter-cluster edge without a "
                        "valid GMI byte");
          } else if (!gateway_knows(r.cluster, r.gmi)) {
            v.push_back(from + " -> " + addr(r.cluster, 0) + ": GMI byte " +
                        std::to_string(r.gmi) + " is unknown to the gateway");
          }
          edges[{c.id, k.id}].push_back({r.cluster, 0});
          continue;
        }
        if (r.gmi >= 0) v.push_back(from + ": intra-cluster edge carries a GMI byte");
        auto it = producers.find({r.cluster, r.kernel});
        if (it == producers.end() || r.port < 0 || r.port >= static_cast<int>(it->second.size())) {
          v.push_back("unwired stream: " + from + " output " + std::to_string(o) +
                      " names missing endpoint " + addr(r.cluster, r.kernel) + " port " +
                      std::to_string(r.port));
          continue;
        }
        ++it->second[r.port];
        edges[{c.id, k.id}].push_back({r.cluster, r.kernel});
      }
      if (k.kind == "gateway") {
        for (auto [byte, port] : k.forwarding) {
          if (port < 0 || port >= static_cast<int>(k.outputs.size())) {
            v.push_back(from + ": forwarding byte " + std::to_string(byte) + " names no port");
          }
        }
      }
    }
    for (const PlanVirtual& pv : c.virtuals) {
      const PlanKernel* g = c.find(0);
      for (int port : pv.ports) {
        if (!g || port < 0 || port >= static_cast<int>(g->outputs.size())) {
          v.push_back(addr(c.id, pv.id) + " (" + pv.label + "): virtual port " +
                      std::to_string(port) + " is not a gateway output");
        }
      }
    }
  }
  if (!egress_seen) v.push_back("no kernel sends the output to the host");
  if (!gateway_knows(plan.host.input_cluster, plan.host.input_gmi)) {
    v.push_back("host input GMI byte " + std::to_string(plan.host.input_gmi) +
                " is unknown to cluster " + std::to_string(plan.host.input_cluster));
  }

  for (const PlanCluster& c : plan.clusters) {
    for (const PlanKernel& k : c.kernels) {
      const auto& count = producers[{c.id, k.id}];
      for (size_t p = 0; p < k.inputs.size(); ++p) {
        const std::string at = addr(c.id, k.id) + " (" + k.label + ") port " + std::to_string(p);
        if (k.kind != "gateway") {
          if (count[p] == 0) v.push_back("unwired stream: " + at + " has no producer");
          if (count[p] > 1) v.push_back(at + " has " + std::to_string(count[p]) + " producers");
        }
        const uint64_t need = m * k.inputs[p].row_bytes;
        if (k.inputs[p].row_bytes == 0 && (k.kind != "gateway" || inbound.count(c.id))) {
          v.push_back(at + ": stream row size unknown");
        } else if (k.inputs[p].capacity < need) {
          v.push_back("capacity violation: " + at + " holds " +
                      std::to_string(k.inputs[p].capacity) + " bytes, one " + std::to_string(m) +
                      "-row matrix needs " + std::to_string(need));
        }
      }
    }
  }

  // Kernel graph must be acyclic.
  {
    std::map<std::pair<int, int>, int> state;
    std::function<bool(std::pair<int, int>)> cyclic = [&](std::pair<int, int> n) {
      int& s = state[n];
      if (s == 1) return true;
      if (s == 2) return false;
      s = 1;
      for (auto next : edges[n]) {
        if (cyclic(next)) return true;
      }
      state[n] = 2;
      return false;
    };
    for (const auto& [n, count] : producers) {
      if (cyclic(n)) {
        v.push_back("cyclic kernel graph through " + addr(n.first, n.second));
        break;
      }
    }
  }

  // Routing state: own cluster's kernels plus one gateway per other
  // cluster, which for N clusters of N kernels is 2N - 1.
  const size_t bound = 2 * std::max<size_t>(nc, max_kernels) - 1;
  for (const PlanCluster& c : plan.clusters) {
    for (const PlanKernel& k : c.kernels) {
      if (!plan.topology.attachments.count(k.node)) {
        v.push_back(addr(c.id, k.id) + " (" + k.label + ") sits on unattached node " +
                    std::to_string(k.node));
      }
      auto t = plan.routing.find(k.node);
      if (t == plan.routing.end()) {
        v.push_back("node " + std::to_string(k.node) + " has no routing tables");
        continue;
      }
      if (t->second.cluster != c.id) {
        v.push_back("node " + std::to_string(k.node) + " hosts cluster " + std::to_string(c.id) +
                    " but routes for cluster " + std::to_string(t->second.cluster));
      }
    }
  }
  for (const auto& [node, t] : plan.routing) {
    auto c = by_id.find(t.cluster);
    const size_t own = c == by_id.end() ? 0 : c->second->kernels.size();
    const size_t stored = t.stored_addresses();
    if (stored > own + size_t(nc) - 1 || stored > bound) {
      v.push_back("routing state: node " + std::to_string(node) + " stores " +
                  std::to_string(stored) + " addresses, bound is " +
                  std::to_string(std::min(own + nc - 1, bound)));
    }
    if (t.gateways.count(t.cluster)) {
      v.push_back("routing state: node " + std::to_string(node) +
                  " lists its own cluster in the gateway table");
    }
  }
  for (NodeId n : {plan.host.ingress, plan.host.egress}) {
    if (!plan.topology.attachments.count(n)) v.push_back("host node " + std::to_string(n) + " is unattached");
  }
  return v;
}

namespace {

std::string file_stem(const std::string& label) {
  std::string s;
  for (char ch : label) s += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
  return s;
}

}  // namespace

std::vector<std::filesystem::path> emit_skeleton(const ClusterPlan& plan,
                                                 const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (const PlanCluster& c : plan.clusters) {
    for (const PlanKernel& k : c.kernels) {
      std::ostringstream os;
      os << "// Kernel " << int(c.id) << "." << k.id << " " << k.label << "\n"
         << "// op: " << k.op << ", node " << k.node << "\n";
      if (!k.params.empty()) os << "// params: " << k.params << "\n";
      if (k.col_end > 0) os << "// columns: [" << k.col_begin << ", " << k.col_end << ")\n";
      os << "\n#include <cstdint>\n\nstruct Stream;\n\n"
         << "void kernel_" << int(c.id) << "_" << k.id << "(";
      for (size_t p = 0; p < k.inputs.size(); ++p) {
        os << (p ? ", " : "") << "Stream& in" << p;
      }
      for (size_t o = 0; o < k.outputs.size(); ++o) {
        os << (k.inputs.empty() && o == 0 ? "" : ", ") << "Stream& out" << o;
      }
      os << ") {\n";
      for (size_t p = 0; p < k.inputs.size(); ++p) {
        os << "  // in" << p << ": " << k.inputs[p].row_bytes << "-byte rows from "
           << k.inputs[p].from << "\n";
      }
      for (size_t o = 0; o < k.outputs.size(); ++o) {
        const runtime::Route& r = k.outputs[o];
        os << "  // out" << o << ": ";
        if (r.egress) {
          os << "host\n";
        } else {
          os << r.cluster << "." << r.kernel << " port " << r.port;
          if (r.gmi >= 0) os << " (GMI byte " << r.gmi << ")";
          os << "\n";
        }
      }
      os << "}\n";
      const std::string s = os.str();
      std::filesystem::path path = dir / ("cluster_" + std::to_string(c.id)) /
                                   ("kernel_" + std::to_string(k.id) + "_" + file_stem(k.label) +
                                    ".cc");
      write_file(path, std::vector<uint8_t>(s.begin(), s.end()));
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace gsim::builder
