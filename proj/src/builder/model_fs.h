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

#ifndef GSIM_BUILDER_MODEL_FS_H_
#define GSIM_BUILDER_MODEL_FS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ibert/encoder.h"

namespace gsim::builder {

struct Model {
  ibert::EncoderConfig cfg;
  std::vector<ibert::EncoderParams> layers;
};

// Model file system layout, relative to its root:
//   model.txt                          encoder dimensions
//   encoder_<l>/<linear>/weight.i8     in_dim x out_dim INT8, row-major
//   encoder_<l>/<linear>/bias.i32      out_dim INT32 little-endian
//   encoder_<l>/<ln>/gamma.f32, beta.f32
//   encoder_<l>/<module>/meta.txt      shapes and scales, key = value
// with <linear> in {q, k, v, attn_out, ffn1, ffn2}, <ln> in {ln1, ln2} and
// the attention module holding only meta.txt.
using FileMap = std::map<std::string, std::vector<uint8_t>>;

FileMap model_files(const Model& model);
void write_model_fs(const std::filesystem::path& dir, const Model& model);

// Reads files by relative path; throws "missing tensor" naming the path.
using FileSource = std::function<std::vector<uint8_t>(const std::string&)>;
FileSource directory_source(const std::filesystem::path& dir);
FileSource map_source(const FileMap& files);

ibert::EncoderConfig read_model_config(const FileSource& src);
ibert::LinearParams read_linear(const FileSource& src, const std::string& module);
ibert::LayerNormParams read_layernorm(const FileSource& src, const std::string& module);
ibert::AttentionParams read_attention(const FileSource& src, const std::string& module);
// Shapes and output scale from a module's meta.txt alone.
struct ModuleInfo {
  std::string kind;  // linear, layernorm or attention
  int in_dim = 0;
  int out_dim = 0;
  int heads = 0;
  double out_scale = 1.0;  // INT8 scale of what the module emits
};
ModuleInfo read_module_info(const FileSource& src, const std::string& module);

// Whole model, every encoder checked against the config.
Model read_model(const FileSource& src);
Model read_model_fs(const std::filesystem::path& dir);

std::string encoder_dir(int layer);

// Parameter archive: one binary file {magic "GSMA", version, entry count,
// then (name length, name, data length, data) per file, sorted by name}
// carrying exactly the model file system's files.
std::vector<uint8_t> encode_archive(const FileMap& files);
FileMap decode_archive(const std::vector<uint8_t>& bytes);
void write_archive(const std::filesystem::path& path, const Model& model);

// Validates the archive (all tensors present, shapes consistent with the
// config and, when given, with `expected`) and writes the model file system.
// Re-importing the same archive rewrites identical bytes.
Model import_model(const std::filesystem::path& archive, const std::filesystem::path& out_dir,
                   const std::optional<ibert::EncoderConfig>& expected = std::nullopt);

}  // namespace gsim::builder

#endif  // GSIM_BUILDER_MODEL_FS_H_
