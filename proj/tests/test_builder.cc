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

#include <algorithm>
#include <set>

#include "builder/build.h"
#include "builder/deploy.h"
#include "builder/description.h"
#include "builder/model_fs.h"
#include "builder_helpers.h"
#include "common/error.h"
#include "common/io.h"
#include "doctest.h"
#include "ibert/encoder.h"
#include "ibert/tensor_io.h"

using namespace gsim;
using namespace gsim::builder;
using namespace gsim::testing;

namespace {

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

FileMap tree(const std::filesystem::path& dir) {
  FileMap files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      files[std::filesystem::relative(e.path(), dir).generic_string()] = read_file(e.path());
    }
  }
  return files;
}

bool has(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

PlanKernel& kernel(ClusterPlan& p, int cluster, int id) {
  for (PlanKernel& k : p.clusters.at(cluster).kernels) {
    if (k.id == id) return k;
  }
  throw std::out_of_range("no kernel " + std::to_string(id));
}

// Meta-only ibert-base build: shapes, ids and wiring without the weights.
struct BaseFixture {
  Preset preset = named_preset("ibert-base");
  FileMap files = meta_only(preset.cfg);
  ClusterPlan plan = build(preset.layers, preset.clusters, "mem", map_source(files));
};

// Tiny model written to disk with its built plan.
struct TinyFixture {
  explicit TinyFixture(int layers = 3, int nodes = 6) {
    preset = named_preset("tiny");
    preset.cfg.layers = layers;
    Preset p = ibert_preset(preset.cfg, 4, nodes);
    preset.layers = p.layers;
    preset.clusters = p.clusters;
    model = synth_model(preset.cfg, 7);
    write_model_fs(dir.path() / "model", model);
    plan = build(preset.layers, preset.clusters, dir.path() / "model");
  }
  TempDir dir{"tiny"};
  Preset preset;
  Model model;
  ClusterPlan plan;
};

}  // namespace

TEST_CASE("model fs: write, read, archive import is idempotent") {
  TempDir dir("mfs");
  const auto cfg = tiny_config(2);
  const Model m = synth_model(cfg, 3);
  write_model_fs(dir.path() / "a", m);
  Model back = read_model_fs(dir.path() / "a");
  CHECK(back.cfg == cfg);
  CHECK(back.layers == m.layers);

  write_archive(dir.path() / "m.gsma", m);
  import_model(dir.path() / "m.gsma", dir.path() / "b", cfg);
  const FileMap first = tree(dir.path() / "b");
  CHECK(first.size() == 1 + 2 * (6 * 3 + 2 * 3 + 1));
  CHECK(first.count("encoder_1/ffn2/weight.i8"));
  import_model(dir.path() / "m.gsma", dir.path() / "b", cfg);
  CHECK(tree(dir.path() / "b") == first);
  CHECK(first == tree(dir.path() / "a"));
}

TEST_CASE("model fs: missing tensor and shape mismatch are rejected") {
  TempDir dir("mfs_bad");
  const auto cfg = tiny_config(1);
  FileMap files = model_files(synth_model(cfg, 4));
  FileMap missing = files;
  missing.erase("encoder_0/k/bias.i32");
  const std::string e = error_text([&] { read_model(map_source(missing)); });
  CHECK(e.find("missing tensor") != std::string::npos);
  CHECK(e.find("encoder_0/k/bias.i32") != std::string::npos);

  FileMap shorter = files;
  shorter["encoder_0/ffn1/weight.i8"].pop_back();
  CHECK(error_text([&] { read_model(map_source(shorter)); }).find("shape mismatch") == 0);

  write_file(dir.path() / "x.gsma", encode_archive(files));
  auto other = cfg;
  other.hidden = 16;
  other.heads = 4;
  CHECK(error_text([&] { import_model(dir.path() / "x.gsma", dir.path() / "out", other); })
            .find("shape mismatch") == 0);
  CHECK(error_text([&] { decode_archive({1, 2, 3}); }).find("malformed archive") == 0);
}

TEST_CASE("descriptions round-trip through JSON") {
  for (const std::string& name : preset_names()) {
    Preset p = named_preset(name);
    CHECK(parse_layer_description(dump_layer_description(p.layers)) == p.layers);
    CHECK(parse_cluster_description(dump_cluster_description(p.clusters)) == p.clusters);
  }
  CHECK(error_text([] { parse_layer_description("{\"format\": \"other\"}"); })
            .find("unsupported format") == 0);
  CHECK(error_text([] { parse_cluster_description("[1,"); }).find("parse error") == 0);
}

TEST_CASE("ibert-base: 12 clusters x 38 kernels, 6 GMI, gateway at 0, contiguous ids") {
  BaseFixture f;
  const ClusterPlan& p = f.plan;
  REQUIRE(p.clusters.size() == 12);
  CHECK(validate(p).empty());
  for (const PlanCluster& c : p.clusters) {
    CHECK(c.kernels.size() == 38);
    CHECK(c.compute_ids.size() == 32);
    CHECK(c.communication_ids.size() == 6);
    CHECK(c.virtual_ids == std::vector<int>{33});
    const PlanKernel* g = c.find(0);
    REQUIRE(g);
    CHECK(g->kind == "gateway");
    std::vector<int> ids = c.compute_ids;
    ids.insert(ids.end(), c.communication_ids.begin(), c.communication_ids.end());
    ids.insert(ids.end(), c.virtual_ids.begin(), c.virtual_ids.end());
    std::sort(ids.begin(), ids.end());
    for (int i = 0; i < 39; ++i) CHECK(ids[i] == i);
    int gmi = 0;
    for (const PlanKernel& k : c.kernels) gmi += k.kind != "compute";
    CHECK(gmi == 6);
    // The gateway broadcasts the encoder input to Q, K, V and the residual.
    REQUIRE(c.virtuals.size() == 1);
    CHECK(c.virtuals[0].ports.size() == 4);
  }
  const PlanCluster& c0 = p.clusters[0];
  CHECK(c0.find(1)->label == "encoder_0.q");
  CHECK(c0.find(4)->op == "attention_scores");
  CHECK(c0.find(16)->op == "softmax_matmul");
  CHECK(c0.find(28)->label == "encoder_0.attn_out");
  CHECK(c0.find(29)->op == "layernorm");
  CHECK(c0.find(32)->label == "encoder_0.ln2");
  for (int id = 34; id <= 36; ++id) CHECK(c0.find(id)->op == "scatter");
  CHECK(c0.find(37)->op == "gather");
  CHECK(c0.find(38)->op == "broadcast");
  CHECK(p.host.input_gmi == 33);
  CHECK(p.host.output_cluster == 11);
  CHECK(p.host.output_kernel == 32);
  // Encoder l hands its output to encoder l+1's virtual broadcast.
  const runtime::Route& r = c0.find(32)->outputs.at(0);
  CHECK(r.cluster == 1);
  CHECK(r.kernel == 0);
  CHECK(r.gmi == 33);
}

TEST_CASE("ibert-base: one encoder maps onto six nodes") {
  BaseFixture f;
  for (const PlanCluster& c : f.plan.clusters) {
    std::set<fabric::NodeId> nodes;
    for (const PlanKernel& k : c.kernels) nodes.insert(k.node);
    CHECK(nodes.size() == 6);
  }
  const PlanCluster& c = f.plan.clusters[1];
  const fabric::NodeId base = 6;
  auto node = [&](int id) { return c.find(id)->node - base; };
  for (int id = 0; id <= 3; ++id) CHECK(node(id) == 0);
  for (int id = 4; id <= 15; ++id) CHECK(node(id) == 1);
  for (int id = 16; id <= 27; ++id) CHECK(node(id) == 2);
  CHECK(node(28) == 3);
  CHECK(node(29) == 3);
  CHECK(node(30) == 4);
  CHECK(node(31) == 5);
  CHECK(node(32) == 5);
  // Scatters land with their heads, the gather with the context kernels,
  // and the LN1 broadcast (mixed destinations) on the sender's node.
  CHECK(node(34) == 1);
  CHECK(node(35) == 1);
  CHECK(node(36) == 2);
  CHECK(node(37) == 2);
  CHECK(node(38) == 3);
  CHECK(c.find(34)->gmi->placement == gmi::Placement::kReceiverSide);
  CHECK(c.find(38)->gmi->placement == gmi::Placement::kSenderSide);
}

TEST_CASE("limits: 300 kernels in a cluster and 257 clusters are rejected") {
  Preset p = named_preset("ibert-base");
  FileMap files = meta_only(p.cfg);
  // 38 kernels and one virtual id, with Q split 260 ways (+2 GMI, -1
  // unsplit kernel): 300 ids.
  Preset wide = p;
  for (LayerSpec& s : wide.layers.layers) {
    if (s.name == "encoder_3.q") s.column_partitions = 260;
  }
  const std::string e = error_text([&] { build(wide.layers, wide.clusters, "mem", map_source(files)); });
  CHECK(e.find("300") != std::string::npos);
  CHECK(e.find("256") != std::string::npos);

  Preset many = p;
  many.clusters.clusters = 257;
  const std::string e2 = error_text([&] { build(many.layers, many.clusters, "mem", map_source(files)); });
  CHECK(e2.find("257") != std::string::npos);
  CHECK(e2.find("256") != std::string::npos);
}

TEST_CASE("routing state: 4 clusters of 4 kernels store at most 7 addresses per node") {
  // A chain of 12 Linear layers, three per cluster: gateway + 3 kernels each.
  ibert::EncoderConfig cfg;
  cfg.hidden = 8;
  cfg.heads = 1;
  cfg.ffn = 8;
  cfg.max_seq = 4;
  cfg.layers = 1;
  FileMap files = meta_only(cfg);
  LayerDescription ld;
  ld.layers.push_back({"input", "source", "", {}, {}, 1, std::nullopt});
  ClusterDescription cd;
  cd.clusters = 4;
  cd.nodes_per_cluster = 2;
  std::string prev = "input";
  for (int i = 0; i < 12; ++i) {
    LayerSpec s;
    s.name = "lin" + std::to_string(i);
    s.module = "linear_quant";
    s.params = "lin" + std::to_string(i);
    s.inputs = {prev};
    ld.layers.push_back(s);
    files[s.params + "/meta.txt"] = files["encoder_0/q/meta.txt"];
    cd.assignment.push_back({i / 3, {s.name}});
    prev = s.name;
  }
  ld.layers.push_back({"output", "sink", "", {prev}, {}, 1, std::nullopt});
  ClusterPlan p = build(ld, cd, "mem", map_source(files));
  CHECK(validate(p).empty());
  // Independent count: distinct (kernel -> node) and (cluster -> gateway node)
  // pairs a node must know, recomputed from the kernel list.
  for (const auto& [node, t] : p.routing) {
    std::set<std::pair<int, int>> needed;
    for (const PlanCluster& c : p.clusters) {
      if (c.id == t.cluster) {
        for (const PlanKernel& k : c.kernels) needed.insert({0, k.id});
      } else {
        needed.insert({1, c.id});
      }
    }
    CHECK(needed.size() == 7);
    CHECK(t.stored_addresses() == needed.size());
  }
  CHECK(p.max_stored_addresses() <= 2 * 4 - 1);
  // Single-consumer inbound streams use gateway forwarding by kernel id.
  for (const PlanCluster& c : p.clusters) {
    CHECK(c.kernels.size() == 4);
    CHECK(c.virtuals.empty());
    REQUIRE(c.find(0)->forwarding.size() == 1);
    CHECK(c.find(0)->forwarding[0].first == 1);
  }
}

TEST_CASE("validate: gateway bypass and undersized FIFO are reported") {
  BaseFixture f;
  ClusterPlan bad = f.plan;
  PlanKernel& ln2 = kernel(bad, 0, 32);
  ln2.outputs[0].kernel = 5;
  CHECK(has(validate(bad), "inter-cluster edge bypasses gateway"));

  ClusterPlan small = f.plan;
  PlanKernel& ffn1 = kernel(small, 2, 30);
  ffn1.inputs[0].capacity = uint64_t(128) * 768 - 1;
  auto v = validate(small);
  CHECK(has(v, "capacity violation"));
  CHECK(has(v, "98304"));

  ClusterPlan unwired = f.plan;
  kernel(unwired, 0, 38).outputs.pop_back();
  CHECK(has(validate(unwired), "unwired stream"));

  ClusterPlan hole = f.plan;
  hole.clusters[4].virtual_ids = {40};
  CHECK(has(validate(hole), "contiguous"));
}

TEST_CASE("build rejects cyclic layer graphs and unknown modules") {
  Preset p = named_preset("tiny");
  FileMap files = meta_only(p.cfg);
  Preset cyc = p;
  for (LayerSpec& s : cyc.layers.layers) {
    if (s.name == "encoder_0.q") s.inputs = {"encoder_0.ln2"};
  }
  CHECK(error_text([&] { build(cyc.layers, cyc.clusters, "mem", map_source(files)); })
            .find("cyclic layer graph") == 0);
  Preset unknown = p;
  unknown.layers.layers[1].module = "conv";
  CHECK(error_text([&] { build(unknown.layers, unknown.clusters, "mem", map_source(files)); })
            .find("unknown module") == 0);
}

TEST_CASE("build is deterministic and the plan round-trips") {
  BaseFixture a, b;
  const std::string bytes = dump_plan(a.plan);
  CHECK(bytes == dump_plan(b.plan));
  ClusterPlan back = parse_plan(bytes);
  CHECK(back == a.plan);
  CHECK(dump_plan(back) == bytes);
}

TEST_CASE("tiny: distributed plan equals the monolithic model") {
  TinyFixture t;
  CHECK(validate(t.plan).empty());
  for (int m : {1, 4, 9, 16}) {
    CAPTURE(m);
    ibert::QuantTensor x = ibert::random_tensor(m, t.preset.cfg.hidden, 100 + m, kModelInputScale);
    PlanRun run = run_plan(t.plan, x);
    REQUIRE(run.complete);
    ibert::QuantTensor want = ibert::model_forward(x, t.model.layers, t.preset.cfg);
    CHECK(run.output.data == want.data);
    CHECK(run.output.scale == want.scale);
    CHECK(run.xti.x <= run.xti.t);
  }
}

TEST_CASE("tiny: GMI byte audit and gateway-only inter-cluster delivery") {
  TinyFixture t;
  ibert::QuantTensor x = ibert::random_tensor(6, t.preset.cfg.hidden, 9, kModelInputScale);
  PlanRun run = run_plan(t.plan, x);
  size_t inter = 0, intra = 0;
  for (const auto& e : run.trace.events) {
    if (e.type != runtime::EventType::kSend && e.type != runtime::EventType::kRecv) continue;
    if (e.inter_cluster) {
      ++inter;
      CHECK(e.gmi_bytes == 1);
      CHECK(e.dst.kernel == 0);
    } else {
      ++intra;
      CHECK(e.gmi_bytes == 0);
      if (!e.src.is_host() && !e.dst.is_host()) CHECK(e.src.cluster == e.dst.cluster);
    }
  }
  // Host input plus two encoder hand-offs, one packet per row, sent and received.
  CHECK(inter == 2 * 3 * 6);
  CHECK(intra > 0);
}

TEST_CASE("tiny: results are invariant under node re-mapping and GMI placement") {
  TinyFixture six(2, 6);
  ibert::QuantTensor x = ibert::random_tensor(7, six.preset.cfg.hidden, 31, kModelInputScale);
  PlanRun base = run_plan(six.plan, x);
  REQUIRE(base.complete);
  for (int nodes : {1, 3, 8}) {
    for (const char* mode : {"auto", "sender", "receiver"}) {
      CAPTURE(nodes);
      CAPTURE(mode);
      ClusterDescription cd = six.preset.clusters;
      cd.nodes_per_cluster = nodes;
      cd.placement.clear();
      cd.gmi_placement = mode;
      ClusterPlan p = build(six.preset.layers, cd, six.dir.path() / "model");
      CHECK(validate(p).empty());
      PlanRun r = run_plan(p, x);
      REQUIRE(r.complete);
      CHECK(r.output == base.output);
    }
  }
}

TEST_CASE("tiny: column-partitioned Linear keeps the result") {
  TinyFixture t(1);
  LayerDescription ld = t.preset.layers;
  for (LayerSpec& s : ld.layers) {
    if (s.name == "encoder_0.ffn1") s.column_partitions = 3;
    if (s.name == "encoder_0.attn_out") s.column_partitions = 2;
  }
  ClusterPlan p = build(ld, t.preset.clusters, t.dir.path() / "model");
  CHECK(validate(p).empty());
  CHECK(p.clusters[0].kernels.size() == 18 + 2 + 2 + 1 + 2);
  ibert::QuantTensor x = ibert::random_tensor(5, t.preset.cfg.hidden, 8, kModelInputScale);
  PlanRun r = run_plan(p, x);
  REQUIRE(r.complete);
  CHECK(r.output == ibert::model_forward(x, t.model.layers, t.preset.cfg));
}

TEST_CASE("tiny: repeated runs give identical traces") {
  TinyFixture t(2);
  ibert::QuantTensor x = ibert::random_tensor(5, t.preset.cfg.hidden, 2, kModelInputScale);
  PlanRun a = run_plan(t.plan, x);
  PlanRun b = run_plan(t.plan, x);
  CHECK(runtime::format_trace(a.trace) == runtime::format_trace(b.trace));
  CHECK(a.output == b.output);
}

TEST_CASE("skeleton: one outline per physical kernel") {
  TinyFixture t(1);
  TempDir out("skel");
  auto files = emit_skeleton(t.plan, out.path());
  CHECK(files.size() == t.plan.clusters[0].kernels.size());
  const std::string s = read_text(files.at(1));
  CHECK(s.find("encoder_0.q") != std::string::npos);
  CHECK(s.find("Stream& in0") != std::string::npos);
}
