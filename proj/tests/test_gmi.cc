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
#include <map>
#include <numeric>
#include <random>

#include "common/error.h"
#include "common/io.h"
#include "doctest.h"
#include "gmi/collectives.h"
#include "gmi/kernels.h"
#include "sim_helpers.h"

using namespace gsim;
using namespace gsim::gmi;
using namespace gsim::testing;

namespace {

Bytes random_bytes(std::mt19937_64& rng, size_t n) {
  Bytes b(n);
  for (auto& v : b) v = static_cast<uint8_t>(rng());
  return b;
}

Bytes int32_bytes(const std::vector<int32_t>& v) {
  Bytes b;
  for (int32_t x : v) append_le<int32_t>(b, x);
  return b;
}

size_t count(const SimTrace& t, EventType type, Endpoint dst) {
  return std::count_if(t.events.begin(), t.events.end(), [&](const TraceEvent& e) {
    return e.type == type && e.dst == dst;
  });
}

}  // namespace

TEST_CASE("broadcast copies a 12-flit message to every member") {
  Bytes msg(768);
  std::iota(msg.begin(), msg.end(), 0);
  auto r = broadcast(msg, 3);
  REQUIRE(r.copies.size() == 3);
  for (const auto& c : r.copies) CHECK(c == msg);
  CHECK(fabric::flit_count(msg.size()) == 12);
  CHECK(broadcast(msg, 1).copies == std::vector<Bytes>{msg});
  CHECK(broadcast(msg, 0).warned_empty);
}

TEST_CASE("broadcast placement: receiver side crosses the network once") {
  for (bool receiver_side : {true, false}) {
    auto cfg = flat_config({1, 2});
    fabric::NodeId bnode = receiver_side ? 2 : 1;
    for (fabric::NodeId n : {1u, 2u}) {
      cfg.tables[n].local = {{1, 1}, {2, bnode}, {3, 2}, {4, 2}, {5, 2}};
    }
    Simulator sim(cfg);
    sim.add_kernel(pass(0, 1, 1, 1, 1, to(0, 2)));
    sim.add_kernel(kernel(0, 2, bnode, {1 << 16}, {to(0, 3), to(0, 4), to(0, 5)},
                          std::make_unique<BroadcastKernel>(3)));
    for (uint8_t m = 3; m <= 5; ++m) sim.add_kernel(pass(0, m, 2, 1, 1, egress()));
    RunResult r = sim.run(direct(0, 1, {0}, 768));
    size_t inter_node = 0;
    for (const auto& e : r.trace.events) {
      if (e.type == EventType::kSend && !e.src.is_host() && e.hops > 0) ++inter_node;
    }
    CHECK(inter_node == (receiver_side ? 1u : 3u));
    REQUIRE(r.egress.size() == 3);
    for (const auto& p : r.egress) CHECK(p == Bytes(768, 0));
  }
}

TEST_CASE("scatter splits in group order") {
  Bytes rows(4 * 16);
  std::iota(rows.begin(), rows.end(), 0);
  auto r = scatter(rows, 4, 16);
  REQUIRE(r.segments.size() == 4);
  for (size_t k = 0; k < 4; ++k) {
    CHECK(r.segments[k] == Bytes(rows.begin() + 16 * k, rows.begin() + 16 * (k + 1)));
  }
  CHECK(r.underfilled == 0);

  Bytes row(768);
  std::iota(row.begin(), row.end(), 0);
  auto h = scatter(row, 12, 64);
  for (size_t k = 0; k < 12; ++k) {
    CHECK(h.segments[k] == Bytes(row.begin() + 64 * k, row.begin() + 64 * k + 64));
  }

  auto u = scatter(Bytes(100, 1), 4, 60);
  CHECK(u.underfilled == 2);
  CHECK(u.segments[1].size() == 40);
  CHECK_THROWS_AS(scatter(Bytes(100, 1), 4, 10), Error);
}

TEST_CASE("gather of scatter is the identity") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    size_t n = 1 + rng() % 32;
    size_t len = rng() % 300;
    size_t min_chunk = std::max<size_t>(1, (len + n - 1) / n);
    size_t chunk = rng() % 3 == 0 ? 0 : min_chunk + rng() % 8;
    Bytes msg = random_bytes(rng, len);
    auto s = scatter(msg, n, chunk);
    std::vector<std::optional<Bytes>> parts(s.segments.begin(), s.segments.end());
    CHECK(gather(parts) == msg);
  }
}

TEST_CASE("gather orders by member regardless of arrival") {
  std::vector<std::optional<Bytes>> parts{Bytes{1}, Bytes{2, 3}, Bytes{4}};
  CHECK(gather(parts) == Bytes{1, 2, 3, 4});
  CHECK(gather({Bytes{9, 9}}) == Bytes{9, 9});
  parts[1].reset();
  try {
    gather(parts);
    FAIL("expected incomplete gather");
  } catch (const Error& e) {
    CHECK(e.kind() == "incomplete gather");
    CHECK(e.detail().find("1") != std::string::npos);
  }

  // Simulated: members answer in reverse order.
  auto cfg = flat_config({1});
  cfg.tables[1].local = {{1, 1}, {2, 1}, {3, 1}, {4, 1}, {9, 1}};
  Simulator sim(cfg);
  sim.add_kernel(kernel(0, 9, 1, {4096}, {to(0, 1), to(0, 2), to(0, 3)},
                        std::make_unique<ScatterKernel>(3, 1)));
  for (uint8_t m = 1; m <= 3; ++m) {
    sim.add_kernel(pass(0, m, 1, 1, 100 - 30 * m, to(0, 4, m - 1)));
  }
  sim.add_kernel(kernel(0, 4, 1, {4096, 4096, 4096}, {egress()},
                        std::make_unique<GatherKernel>(std::vector<std::string>{"0.1", "0.2", "0.3"})));
  Stimulus st;
  st.cluster = 0;
  st.kernel = 9;
  st.packets.push_back({0, Bytes{7, 8, 9}, true});
  RunResult r = sim.run(st);
  std::vector<int> arrival;
  for (const auto& e : r.trace.events) {
    if (e.type == EventType::kRecv && e.dst == Endpoint{0, 4}) arrival.push_back(e.src.kernel);
  }
  CHECK(arrival == std::vector<int>{3, 2, 1});
  REQUIRE(r.egress.size() == 1);
  CHECK(r.egress[0] == Bytes{7, 8, 9});
}

TEST_CASE("gather of 12 head outputs builds the full-width rows") {
  std::mt19937_64 rng(3);
  const size_t m = 128;
  auto cfg = flat_config({1});
  std::map<uint8_t, fabric::NodeId> local;
  for (int k = 0; k < 64; ++k) local[k] = 1;
  cfg.tables[1].local = local;
  Simulator sim(cfg);
  std::vector<Route> heads;
  std::vector<std::string> names;
  std::vector<uint64_t> caps;
  for (int h = 0; h < 12; ++h) {
    heads.push_back(to(0, 4 + h));
    names.push_back("0." + std::to_string(4 + h));
    caps.push_back(m * 64);
    sim.add_kernel(pass(0, 4 + h, 1, 2, 3 + (h * 7) % 5, to(0, 37, h)));
  }
  sim.add_kernel(kernel(0, 34, 1, {m * 768}, heads, std::make_unique<ScatterKernel>(12, 64)));
  sim.add_kernel(kernel(0, 37, 1, caps, {egress()}, std::make_unique<GatherKernel>(names)));
  std::vector<Bytes> rows;
  for (size_t i = 0; i < m; ++i) rows.push_back(random_bytes(rng, 768));
  Stimulus st = make_stimulus(rows, 0, 12, 0, -1);
  st.kernel = 34;
  RunResult r = sim.run(st);
  CHECK(r.egress == rows);
  CHECK(r.egress_eof.back());
}

TEST_CASE("reduce folds elementwise in group order") {
  CHECK(reduce({int32_bytes({1, 2}), int32_bytes({3, 4})}, ReduceFn::kSum, ElemType::kInt32) ==
        int32_bytes({4, 6}));
  CHECK(reduce({int32_bytes({5, -7})}, ReduceFn::kSum, ElemType::kInt32) == int32_bytes({5, -7}));
  CHECK(reduce({Bytes{1, 0xFF}, Bytes{3, 2}}, ReduceFn::kMin, ElemType::kInt8) == Bytes{1, 0xFF});
  CHECK(reduce({Bytes{1, 0xFF}, Bytes{3, 2}}, ReduceFn::kMax, ElemType::kInt8) == Bytes{3, 2});
  CHECK_THROWS_AS(reduce({Bytes{1, 2}, Bytes{1}}, ReduceFn::kSum, ElemType::kInt8), Error);
  try {
    reduce({Bytes{100}, Bytes{100}}, ReduceFn::kSum, ElemType::kInt8);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.kind() == "arithmetic fault");
  }

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    size_t n = 1 + rng() % 8, len = 1 + rng() % 40;
    auto fn = static_cast<ReduceFn>(rng() % 3);
    std::vector<std::vector<int32_t>> vals(n, std::vector<int32_t>(len));
    std::vector<Bytes> segs;
    for (auto& v : vals) {
      for (auto& x : v) x = static_cast<int32_t>(rng() % 2000001) - 1000000;
      segs.push_back(int32_bytes(v));
    }
    std::vector<int32_t> expect = vals[0];
    for (size_t k = 1; k < n; ++k) {
      for (size_t i = 0; i < len; ++i) {
        if (fn == ReduceFn::kSum) expect[i] += vals[k][i];
        if (fn == ReduceFn::kMin) expect[i] = std::min(expect[i], vals[k][i]);
        if (fn == ReduceFn::kMax) expect[i] = std::max(expect[i], vals[k][i]);
      }
    }
    CHECK(reduce(segs, fn, ElemType::kInt32) == int32_bytes(expect));
  }
}

TEST_CASE("reducing partial-row products equals the full matmul") {
  std::mt19937_64 rng(17);
  const int m = 6, h = 40, n = 9, split = 17;
  std::vector<int8_t> x(m * h), w(h * n);
  for (auto& v : x) v = static_cast<int8_t>(rng());
  for (auto& v : w) v = static_cast<int8_t>(rng());
  auto partial = [&](int lo, int hi) {
    std::vector<int32_t> acc(m * n, 0);
    for (int i = 0; i < m; ++i)
      for (int k = lo; k < hi; ++k)
        for (int j = 0; j < n; ++j) acc[i * n + j] += x[i * h + k] * w[k * n + j];
    return acc;
  };
  Bytes merged = reduce({int32_bytes(partial(0, split)), int32_bytes(partial(split, h))},
                        ReduceFn::kSum, ElemType::kInt32);
  CHECK(merged == int32_bytes(partial(0, h)));
}

TEST_CASE("allgather is broadcast of gather") {
  CHECK(allgather({Bytes{1}, Bytes{2, 3}}) ==
        std::vector<Bytes>{Bytes{1, 2, 3}, Bytes{1, 2, 3}});
  CHECK(allgather({Bytes{4, 5}}) == std::vector<Bytes>{Bytes{4, 5}});

  // Stream form: scatter source, two members, gather, broadcast back.
  auto cfg = flat_config({1, 2});
  for (fabric::NodeId node : {1u, 2u}) {
    cfg.tables[node].local = {{1, 1}, {2, 2}, {4, 1}, {5, 1}, {6, 1}, {7, 2}, {9, 1}};
  }
  Simulator sim(cfg);
  sim.add_kernel(kernel(0, 9, 1, {4096}, {to(0, 1), to(0, 2)},
                        std::make_unique<ScatterKernel>(2, 2)));
  sim.add_kernel(pass(0, 1, 1, 1, 3, to(0, 4, 0)));
  sim.add_kernel(pass(0, 2, 2, 1, 3, to(0, 4, 1)));
  sim.add_kernel(kernel(0, 4, 1, {4096, 4096}, {to(0, 5)},
                        std::make_unique<GatherKernel>(std::vector<std::string>{"0.1", "0.2"})));
  sim.add_kernel(kernel(0, 5, 1, {4096}, {to(0, 6), to(0, 7)},
                        std::make_unique<BroadcastKernel>(2)));
  sim.add_kernel(pass(0, 6, 1, 1, 1, egress()));
  sim.add_kernel(pass(0, 7, 2, 1, 1, egress()));
  Stimulus st;
  st.kernel = 9;
  st.packets.push_back({0, Bytes{1, 2, 3, 4}, true});
  RunResult r = sim.run(st);
  std::vector<Bytes> got = r.egress;
  std::sort(got.begin(), got.end());
  CHECK(got == allgather({Bytes{1, 2}, Bytes{3, 4}}));
  CHECK(count(r.trace, EventType::kRecv, {0, 6}) == 1);
  CHECK(count(r.trace, EventType::kRecv, {0, 7}) == 1);
}

TEST_CASE("incomplete gather in a run lists the absent member") {
  auto cfg = flat_config({1});
  cfg.tables[1].local = {{1, 1}, {2, 1}, {3, 1}, {4, 1}, {9, 1}};
  Simulator sim(cfg);
  // Three-byte message, two-byte chunks: member 0.3 receives nothing.
  sim.add_kernel(kernel(0, 9, 1, {4096}, {to(0, 1), to(0, 2), to(0, 3)},
                        std::make_unique<ScatterKernel>(3, 2)));
  for (uint8_t m = 1; m <= 3; ++m) sim.add_kernel(pass(0, m, 1, 1, 1, to(0, 4, m - 1)));
  sim.add_kernel(kernel(0, 4, 1, {4096, 4096, 4096}, {egress()},
                        std::make_unique<GatherKernel>(std::vector<std::string>{"0.1", "0.2", "0.3"})));
  Stimulus st;
  st.kernel = 9;
  st.packets.push_back({0, Bytes{7, 8, 9}, true});
  try {
    sim.run(st);
    FAIL("expected incomplete gather");
  } catch (const Error& e) {
    CHECK(e.kind() == "incomplete gather");
    CHECK(e.detail().find("0.3") != std::string::npos);
  }
}

namespace {

RunResult run_gateway(int gmi_byte) {
  auto cfg = flat_config({2});
  cfg.tables[2].cluster = 1;
  cfg.tables[2].local = {{0, 2}, {5, 2}, {6, 2}, {7, 2}};
  Simulator sim(cfg);
  std::map<uint8_t, int> forwarding{{5, 0}};
  std::map<uint8_t, GatewayKernel::Virtual> virtuals;
  virtuals[33] = {GmiOp::kBroadcast, {1, 2}, 0};
  sim.add_kernel(kernel(1, 0, 2, {1 << 16}, {to(1, 5), to(1, 6), to(1, 7)},
                        std::make_unique<GatewayKernel>(forwarding, virtuals)));
  for (uint8_t k : {5, 6, 7}) sim.add_kernel(pass(1, k, 2, 1, 1, egress()));
  Bytes row(768);
  std::iota(row.begin(), row.end(), 0);
  return sim.run(make_stimulus({row}, 0, 12, 1, gmi_byte));
}

}  // namespace

TEST_CASE("gateway forwards by GMI byte and strips it") {
  RunResult r = run_gateway(5);
  REQUIRE(r.egress.size() == 1);
  CHECK(r.egress[0].size() == 768);
  CHECK(r.egress[0][1] == 1);
  bool seen = false;
  for (const auto& e : r.trace.events) {
    if (e.type == EventType::kRecv && e.dst == Endpoint{1, 5}) {
      seen = true;
      CHECK(e.bytes == 768);
      CHECK(e.gmi_bytes == 0);
    }
    if (e.type == EventType::kRecv && e.dst == Endpoint{1, 0}) {
      CHECK(e.bytes == 769);
      CHECK(e.inter_cluster);
    }
  }
  CHECK(seen);
}

TEST_CASE("gateway virtual broadcast fans out without another network hop") {
  RunResult r = run_gateway(33);
  CHECK(r.egress.size() == 2);
  size_t fan = 0;
  for (const auto& e : r.trace.events) {
    if (e.type == EventType::kSend && e.src == Endpoint{1, 0}) {
      ++fan;
      CHECK(e.hops == 0);
      CHECK(e.gmi_bytes == 0);
    }
  }
  CHECK(fan == 2);
}

TEST_CASE("unknown GMI byte is a dead letter") {
  RunResult r = run_gateway(0xFF);
  CHECK(r.egress.empty());
  size_t dead = 0, recv = 0;
  for (const auto& e : r.trace.events) {
    dead += e.type == EventType::kDeadLetter;
    recv += e.type == EventType::kRecv && e.dst.kernel != 0;
  }
  CHECK(dead == 1);
  CHECK(recv == 0);
}

TEST_CASE("spec checks") {
  GmiKernelSpec s;
  s.op = GmiOp::kGather;
  CHECK_FALSE(check_spec(s).empty());
  s.group = {{0, 1}, {0, 2}};
  CHECK(check_spec(s).empty());
  s.root = fabric::KernelAddress{0, 3};
  CHECK_FALSE(check_spec(s).empty());
  s.group.push_back({0, 1});
  CHECK(check_spec(s).size() == 2);
  GmiKernelSpec b;
  CHECK(check_spec(b).empty());  // empty broadcast is only a warning
  CHECK(parse_op("scatter") == GmiOp::kScatter);
  CHECK_THROWS_AS(parse_op("alltoall"), Error);
}
