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

// Exercises the shared library through its C header only.

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "gsim/gsim.h"

namespace {

namespace fs = std::filesystem;

struct Scratch {
  fs::path path;
  Scratch() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("gsim_capi_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  gsim_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version and presets") {
  CHECK(std::string(gsim_version()) == "1.0.0");
  char* names = nullptr;
  REQUIRE(gsim_preset_names(&names) == GSIM_OK);
  const std::string n = take(names);
  CHECK(n.find("tiny") != std::string::npos);
  CHECK(n.find("ibert-base") != std::string::npos);
}

TEST_CASE("tiny model: build, run, compare with the monolithic executor") {
  Scratch dir;
  REQUIRE(gsim_synth_model("tiny", 2, 5, (dir / "m.gsa").c_str(), nullptr) == GSIM_OK);
  REQUIRE(gsim_import_archive((dir / "m.gsa").c_str(), (dir / "model").c_str()) == GSIM_OK);
  REQUIRE(gsim_write_descriptions("tiny", 2, 0, (dir / "desc").c_str()) == GSIM_OK);

  gsim_plan* plan = nullptr;
  REQUIRE(gsim_plan_build((dir / "desc/layers.json").c_str(), (dir / "desc/clusters.json").c_str(),
                          (dir / "model").c_str(), &plan) == GSIM_OK);
  char* problems = nullptr;
  REQUIRE(gsim_plan_validate(plan, &problems) == GSIM_OK);
  CHECK(take(problems).empty());
  char* summary = nullptr;
  REQUIRE(gsim_plan_summary(plan, &summary) == GSIM_OK);
  CHECK(take(summary).find("clusters = 2") != std::string::npos);

  REQUIRE(gsim_plan_save(plan, (dir / "plan.json").c_str()) == GSIM_OK);
  gsim_plan* loaded = nullptr;
  REQUIRE(gsim_plan_load((dir / "plan.json").c_str(), &loaded) == GSIM_OK);

  int max_rows = 0, cols = 0;
  REQUIRE(gsim_plan_input_shape(loaded, &max_rows, &cols) == GSIM_OK);
  gsim_tensor* x = nullptr;
  REQUIRE(gsim_tensor_random(5, cols, 3, &x) == GSIM_OK);

  gsim_run_options opt;
  gsim_run_options_init(&opt);
  gsim_run* run = nullptr;
  REQUIRE(gsim_run_plan(loaded, x, &opt, &run) == GSIM_OK);
  int complete = 0;
  REQUIRE(gsim_run_complete(run, &complete) == GSIM_OK);
  CHECK(complete == 1);
  uint64_t cx = 0, ct = 0, ci = 0;
  REQUIRE(gsim_run_components(run, &cx, &ct, &ci) == GSIM_OK);
  CHECK(cx > 0);
  CHECK(cx <= ct);

  gsim_tensor* distributed = nullptr;
  gsim_tensor* monolithic = nullptr;
  REQUIRE(gsim_run_output(run, &distributed) == GSIM_OK);
  REQUIRE(gsim_model_forward((dir / "model").c_str(), x, &monolithic) == GSIM_OK);
  int equal = 0;
  REQUIRE(gsim_tensor_equal(distributed, monolithic, &equal) == GSIM_OK);
  CHECK(equal == 1);

  int rows = 0, c = 0;
  REQUIRE(gsim_tensor_shape(distributed, &rows, &c) == GSIM_OK);
  std::vector<int8_t> data(size_t(rows) * c);
  CHECK(gsim_tensor_copy(distributed, data.data(), data.size()) == GSIM_OK);
  CHECK(gsim_tensor_copy(distributed, data.data(), data.size() - 1) == GSIM_ERR_VALIDATION);

  gsim_tensor_free(x);
  gsim_tensor_free(distributed);
  gsim_tensor_free(monolithic);
  gsim_run_free(run);
  gsim_plan_free(loaded);
  gsim_plan_free(plan);
}

TEST_CASE("errors map to status codes and a message") {
  gsim_plan* plan = nullptr;
  CHECK(gsim_plan_load("/nonexistent/plan.json", &plan) == GSIM_ERR_IO);
  CHECK(plan == nullptr);
  CHECK(std::string(gsim_last_error()).size() > 0);

  int64_t g = 0, full = 0;
  CHECK(gsim_routing_bound(257, 4, &g, &full) == GSIM_ERR_VALIDATION);
  REQUIRE(gsim_routing_bound(256, 256, &g, &full) == GSIM_OK);
  CHECK(g == 511);
  CHECK(full == 65536);

  gsim_plan_free(nullptr);
  gsim_run_free(nullptr);
  gsim_tensor_free(nullptr);
}

TEST_CASE("estimates through the C interface") {
  double lat = 0, lat0 = 0, tp = 0;
  REQUIRE(gsim_estimate_seq(GSIM_DATA_DIR "/encoder_cycles.csv", 128, 12, 0, 200e6, &lat, &lat0, &tp) ==
          GSIM_OK);
  CHECK(lat == doctest::Approx(lat0));
  CHECK(tp > 2000);
  CHECK(gsim_estimate_seq(GSIM_DATA_DIR "/encoder_cycles.csv", 500, 12, 0, 200e6, &lat, &lat0, &tp) ==
        GSIM_ERR_VALIDATION);

  char* text = nullptr;
  REQUIRE(gsim_estimate_versal("ibert-base", 0, &text, nullptr) == GSIM_OK);
  CHECK(take(text).find("312") != std::string::npos);

  int all_pass = 0;
  REQUIRE(gsim_verify_kernels("requant", 20, 0, 1, nullptr, nullptr, &all_pass) == GSIM_OK);
  CHECK(all_pass == 1);
  CHECK(gsim_verify_kernels("nonsense", 1, 0, 1, nullptr, nullptr, &all_pass) ==
        GSIM_ERR_VALIDATION);
}
