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
#include <cmath>
#include <functional>

#include "common/error.h"
#include "common/io.h"
#include "doctest.h"
#include "perfmodel/model.h"

using namespace gsim;
using namespace gsim::perfmodel;

namespace {

std::vector<CycleRow> shipped_table() {
  return parse_cycle_table(read_text(std::filesystem::path(GSIM_DATA_DIR) / "encoder_cycles.csv"));
}

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

TEST_CASE("published latency table from the cycle dataset, d = 0") {
  const auto table = shipped_table();
  REQUIRE(table.size() == 8);
  const double ms[] = {0.416, 0.630, 0.837, 1.053, 1.461, 2.269, 3.910, 7.193};
  const auto rows = latency_table(table, 12, kDefaultSwitchLatencyS, kDefaultClockHz);
  for (size_t k = 0; k < rows.size(); ++k) {
    CAPTURE(rows[k].seq);
    CHECK(rel(rows[k].latency_no_switch_s * 1e3, ms[k]) < 0.002);
    // Eleven switch hops of 1.1 us on top.
    CHECK(rows[k].latency_s - rows[k].latency_no_switch_s == doctest::Approx(11 * 1.1e-6));
  }
}

TEST_CASE("end-to-end latency examples") {
  PipelineModel m{12, 6936, 6936, 0, 0, 200e6};
  CHECK(end_to_end_latency(m) == doctest::Approx(416.16e-6));
  m = {12, 209789, 111708, 767, 0, 200e6};
  CHECK(end_to_end_latency(m) == doctest::Approx(7.19288e-3).epsilon(1e-5));
  m.d = 1.1e-6;
  CHECK(end_to_end_latency(m) == doctest::Approx(7.20498e-3).epsilon(1e-5));
  CHECK(end_to_end_cycles(m) == doctest::Approx(209789 + 11 * (111708 + 220.0)));
  m.layers = 1;
  CHECK(end_to_end_latency(m) == 209789 / 200e6);
}

TEST_CASE("latency is monotone in T, X, d, L") {
  const PipelineModel base{4, 1000, 400, 10, 1e-6, 200e6};
  const double l0 = end_to_end_latency(base);
  PipelineModel m = base;
  m.t += 1;
  CHECK(end_to_end_latency(m) > l0);
  m = base;
  m.x += 1;
  CHECK(end_to_end_latency(m) > l0);
  m = base;
  m.d += 1e-7;
  CHECK(end_to_end_latency(m) > l0);
  m = base;
  m.layers += 1;
  CHECK(end_to_end_latency(m) > l0);
}

TEST_CASE("model rejects invalid parameters") {
  CHECK(error_text([] { end_to_end_latency({0, 10, 5, 0, 0, 1}); }).find("L must") !=
        std::string::npos);
  CHECK(error_text([] { end_to_end_latency({1, 10, 11, 0, 0, 1}); }).find("X <= T") !=
        std::string::npos);
  CHECK(error_text([] { end_to_end_latency({1, 10, 5, 0, 0, 0}); }).find("frequency") !=
        std::string::npos);
}

TEST_CASE("average sequence length by interpolation") {
  const auto table = shipped_table();
  const CycleRow r = interpolate(table, 38);
  // 6/32 of the way from 32 to 64.
  CHECK(r.x == doctest::Approx(35828 + (61121 - 35828) * 6.0 / 32));
  CHECK(r.t == doctest::Approx(59600 + (109660 - 59600) * 6.0 / 32));
  const double s = end_to_end_latency_no_switch({12, r.t, r.x, r.i, 0, 200e6});
  CHECK(rel(s * 1e3, 2.58) < 0.01);
  CHECK(interpolate(table, 64).t == 109660);
  CHECK(error_text([&] { interpolate(table, 200); }).find("out of range") != std::string::npos);
}

TEST_CASE("throughput") {
  PipelineModel m{12, 209789, 111708, 767, 1.1e-6, 200e6};
  const double tp = throughput(m, 128);
  CHECK(tp == doctest::Approx(200e6 / (128.0 * 767)));
  CHECK(rel(tp, 2023.47) < 0.02);
  CHECK(rel(tp, 2023.47) > 0.005);  // the residual is real, not tuned away
  m = {12, 11004, 10455, 275, 0, 200e6};
  CHECK(throughput(m, 2) == doctest::Approx(363636.36));
  PipelineModel twice = m;
  twice.i *= 2;
  CHECK(throughput(twice, 2) == doctest::Approx(throughput(m, 2) / 2));
  m = {12, 6936, 6936, 0, 0, 200e6};
  CHECK(throughput(m, 1) == doctest::Approx(200e6 / 6936));
}

TEST_CASE("cycle table parsing") {
  const auto table = shipped_table();
  CHECK(parse_cycle_table(format_cycle_table(table)).size() == table.size());
  CHECK(error_text([] { parse_cycle_table("seq,X,T\n1,2,3\n"); }).find("malformed table") !=
        std::string::npos);
  CHECK(error_text([] { parse_cycle_table("seq,X,T,I\n2,1,1,0\n1,1,1,0\n"); }).find("increase") !=
        std::string::npos);
  CHECK(error_text([] { parse_cycle_table("seq,X,T,I\n1,5,4,0\n"); }).find("X <= T") !=
        std::string::npos);
  CHECK(error_text([] { parse_cycle_table("seq,X,T,I\n1,a,4,0\n"); }).find("not a number") !=
        std::string::npos);
}

TEST_CASE("reports") {
  const auto rows = latency_table(shipped_table(), 12, 0, 200e6);
  const std::string csv = latency_csv(rows);
  CHECK(csv.rfind("seq,X,T,I,latency_ms", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  const std::string text = latency_text(rows);
  CHECK(text.find("7.193") != std::string::npos);
  CHECK(text.find("0.416") != std::string::npos);
}

TEST_CASE("Versal estimate for the base encoder") {
  const ibert::EncoderConfig cfg;
  const VersalEstimate e = versal_estimate(cfg, default_allocation(cfg));
  REQUIRE(e.kernels.size() == 8);
  const AieKernelEstimate& q = e.kernels[0];
  CHECK(q.aies == 24);
  CHECK(q.ops_per_aie == 128 * 768 * 32);
  CHECK(q.ops_per_aie == 3'145'728);
  CHECK(q.cycles == 49'152);
  CHECK(q.latency_ns == 49'152);
  CHECK(q.bytes_per_aie == 768 * 32);
  CHECK(e.kernels[3].ops_per_aie == 128 * 128 * 64);
  CHECK(e.kernels[3].latency_us == 16);
  CHECK(e.kernels[6].aies == 96);
  CHECK(e.kernels[6].latency_us == 49);
  CHECK(e.total_aies == 24 * 4 + 12 + 12 + 96 * 2);
  CHECK(e.total_aies == 312);
  CHECK(e.matmul_ns == 98'000);
  CHECK(e.encoder_ns == 124'100);
  CHECK(e.first_output_ns == 65'800);
  CHECK(e.model_ns == 124'100 + 11 * (65'800 + 1'100));
  CHECK(e.model_ns == 860'000);
  CHECK(versal_text(e).find("860.0 us") != std::string::npos);
  CHECK(versal_csv(e).find("total,aies,312") != std::string::npos);
}

TEST_CASE("Versal allocation faults") {
  const ibert::EncoderConfig cfg;
  VersalAllocation a = default_allocation(cfg);
  a.kernels[0].aies = 16;  // 36 KB per AIE
  CHECK(error_text([&] { versal_estimate(cfg, a); }).find("at least 18 AIEs") !=
        std::string::npos);
  a = default_allocation(cfg);
  a.kernels[6].aies = 192;
  CHECK(error_text([&] { versal_estimate(cfg, a); }).find("device fault") != std::string::npos);
}

TEST_CASE("routing state bound") {
  CHECK(routing_state_bound(256, 256).gateway == 511);
  CHECK(routing_state_bound(256, 256).full_mesh == 65'536);
  CHECK(routing_state_bound(12, 12).gateway == 23);
  CHECK(routing_state_bound(12, 12).full_mesh == 144);
  CHECK(routing_state_bound(1, 1).gateway == 1);
  CHECK(routing_state_bound(1, 1).full_mesh == 1);
  CHECK(error_text([] { routing_state_bound(257, 1); }).find("out of range") != std::string::npos);
}
