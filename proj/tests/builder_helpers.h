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

#ifndef GSIM_TESTS_BUILDER_HELPERS_H_
#define GSIM_TESTS_BUILDER_HELPERS_H_

#include <filesystem>
#include <random>
#include <string>

#include "builder/description.h"
#include "builder/model_fs.h"
#include "builder/synth.h"
#include "common/io.h"

namespace gsim::testing {

// Directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("gsim_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline builder::Model synth_model(const ibert::EncoderConfig& cfg, uint64_t seed) {
  return {cfg, builder::synthesize_model(cfg, seed)};
}

inline std::vector<uint8_t> text(const std::string& s) { return {s.begin(), s.end()}; }

// model.txt plus meta.txt of every module, no tensors: enough for build().
inline builder::FileMap meta_only(const ibert::EncoderConfig& cfg) {
  builder::FileMap files;
  files["model.txt"] = text("format = gsim-model\nversion = 1\nhidden = " +
                            std::to_string(cfg.hidden) + "\nheads = " + std::to_string(cfg.heads) +
                            "\nffn = " + std::to_string(cfg.ffn) + "\nmax_seq = " +
                            std::to_string(cfg.max_seq) + "\nlayers = " +
                            std::to_string(cfg.layers) + "\n");
  auto linear = [&](const std::string& dir, int in, int out) {
    files[dir + "/meta.txt"] = text("kind = linear\nin_dim = " + std::to_string(in) +
                                    "\nout_dim = " + std::to_string(out) +
                                    "\nin_scale = 1\nweight_scale = 1\nout_scale = 1\n");
  };
  auto ln = [&](const std::string& dir) {
    files[dir + "/meta.txt"] = text("kind = layernorm\ndim = " + std::to_string(cfg.hidden) +
                                    "\nmain_scale = 1\nresidual_scale = 1\ninput_scale = 1\n"
                                    "shift = 0\nout_scale = 1\n");
  };
  for (int l = 0; l < cfg.layers; ++l) {
    const std::string e = builder::encoder_dir(l);
    for (const char* m : {"q", "k", "v", "attn_out"}) linear(e + "/" + m, cfg.hidden, cfg.hidden);
    linear(e + "/ffn1", cfg.hidden, cfg.ffn);
    linear(e + "/ffn2", cfg.ffn, cfg.hidden);
    ln(e + "/ln1");
    ln(e + "/ln2");
    files[e + "/attention/meta.txt"] =
        text("kind = attention\nheads = " + std::to_string(cfg.heads) + "\nhead_dim = " +
             std::to_string(cfg.head_dim()) + "\ncontext_scale = 1\n");
  }
  return files;
}

inline ibert::EncoderConfig tiny_config(int layers = 3) {
  ibert::EncoderConfig cfg = builder::named_preset("tiny").cfg;
  cfg.layers = layers;
  return cfg;
}

}  // namespace gsim::testing

#endif  // GSIM_TESTS_BUILDER_HELPERS_H_
