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

#include "builder/model_fs.h"

#include <bit>
#include <cstring>

#include "common/error.h"
#include "common/io.h"

namespace gsim::builder {

using ibert::AttentionParams;
using ibert::EncoderConfig;
using ibert::EncoderParams;
using ibert::LayerNormParams;
using ibert::LinearParams;

namespace {

constexpr uint32_t kArchiveMagic = 0x414d5347;  // "GSMA"
constexpr uint32_t kArchiveVersion = 1;

std::vector<uint8_t> text_bytes(const std::string& s) { return {s.begin(), s.end()}; }

std::string bytes_text(const std::vector<uint8_t>& b) { return {b.begin(), b.end()}; }

void add_linear(FileMap& files, const std::string& dir, const LinearParams& p) {
  KeyValues kv;
  kv["kind"] = "linear";
  kv["in_dim"] = std::to_string(p.in_dim);
  kv["out_dim"] = std::to_string(p.out_dim);
  kv["in_scale"] = format_double(p.in_scale);
  kv["weight_scale"] = format_double(p.weight_scale);
  kv["out_scale"] = format_double(p.out_scale);
  files[dir + "/meta.txt"] = text_bytes(render_key_values(kv));
  files[dir + "/weight.i8"] = std::vector<uint8_t>(p.weight.begin(), p.weight.end());
  std::vector<uint8_t> bias;
  for (int32_t b : p.bias) append_le<int32_t>(bias, b);
  files[dir + "/bias.i32"] = std::move(bias);
}

std::vector<uint8_t> floats(const std::vector<float>& v) {
  std::vector<uint8_t> out;
  for (float f : v) append_le<uint32_t>(out, std::bit_cast<uint32_t>(f));
  return out;
}

void add_layernorm(FileMap& files, const std::string& dir, const LayerNormParams& p) {
  KeyValues kv;
  kv["kind"] = "layernorm";
  kv["dim"] = std::to_string(p.dim);
  kv["main_scale"] = format_double(p.main_scale);
  kv["residual_scale"] = format_double(p.residual_scale);
  kv["input_scale"] = format_double(p.input_scale);
  kv["shift"] = std::to_string(p.shift);
  kv["out_scale"] = format_double(p.out_scale);
  files[dir + "/meta.txt"] = text_bytes(render_key_values(kv));
  files[dir + "/gamma.f32"] = floats(p.gamma);
  files[dir + "/beta.f32"] = floats(p.beta);
}

KeyValues read_meta(const FileSource& src, const std::string& module, const char* kind) {
  KeyValues kv = parse_key_values(bytes_text(src(module + "/meta.txt")));
  std::string k = kv_string(kv, "kind", module);
  if (k != kind) {
    throw validation_error("shape mismatch", module + " is a " + k + " module, expected " + kind);
  }
  return kv;
}

int positive(const KeyValues& kv, const char* key, const std::string& where) {
  int64_t v = kv_int(kv, key, where);
  if (v <= 0 || v > (1 << 20)) {
    throw validation_error("malformed field", where + ": '" + key + "' out of range");
  }
  return static_cast<int>(v);
}

std::vector<float> read_floats(const FileSource& src, const std::string& path, int n) {
  std::vector<uint8_t> b = src(path);
  if (b.size() != size_t(n) * 4) {
    throw validation_error("shape mismatch", path + " holds " + std::to_string(b.size()) +
                                                 " bytes, expected " + std::to_string(n * 4));
  }
  std::vector<float> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::bit_cast<float>(load_le<uint32_t>(b.data() + 4 * i));
  return out;
}

}  // namespace

std::string encoder_dir(int layer) { return "encoder_" + std::to_string(layer); }

FileMap model_files(const Model& model) {
  model.cfg.check();
  FileMap files;
  KeyValues kv;
  kv["format"] = "gsim-model";
  kv["version"] = "1";
  kv["hidden"] = std::to_string(model.cfg.hidden);
  kv["heads"] = std::to_string(model.cfg.heads);
  kv["ffn"] = std::to_string(model.cfg.ffn);
  kv["max_seq"] = std::to_string(model.cfg.max_seq);
  kv["layers"] = std::to_string(model.cfg.layers);
  files["model.txt"] = text_bytes(render_key_values(kv));
  if (static_cast<int>(model.layers.size()) != model.cfg.layers) {
    throw validation_error("shape mismatch", "model has " + std::to_string(model.layers.size()) +
                                                 " encoders, config says " +
                                                 std::to_string(model.cfg.layers));
  }
  for (size_t l = 0; l < model.layers.size(); ++l) {
    const EncoderParams& p = model.layers[l];
    const std::string e = encoder_dir(static_cast<int>(l));
    add_linear(files, e + "/q", p.q);
    add_linear(files, e + "/k", p.k);
    add_linear(files, e + "/v", p.v);
    add_linear(files, e + "/attn_out", p.attn_out);
    add_linear(files, e + "/ffn1", p.ffn1);
    add_linear(files, e + "/ffn2", p.ffn2);
    add_layernorm(files, e + "/ln1", p.ln1);
    add_layernorm(files, e + "/ln2", p.ln2);
    KeyValues a;
    a["kind"] = "attention";
    a["heads"] = std::to_string(p.attention.heads);
    a["head_dim"] = std::to_string(p.attention.head_dim);
    a["context_scale"] = format_double(p.attention.context_scale);
    files[e + "/attention/meta.txt"] = text_bytes(render_key_values(a));
  }
  return files;
}

void write_model_fs(const std::filesystem::path& dir, const Model& model) {
  for (const auto& [rel, bytes] : model_files(model)) write_file(dir / rel, bytes);
}

FileSource directory_source(const std::filesystem::path& dir) {
  return [dir](const std::string& rel) {
    std::filesystem::path p = dir / rel;
    if (!std::filesystem::exists(p)) {
      throw validation_error("missing tensor", rel + " not found under " + dir.string());
    }
    return read_file(p);
  };
}

FileSource map_source(const FileMap& files) {
  return [&files](const std::string& rel) {
    auto it = files.find(rel);
    if (it == files.end()) throw validation_error("missing tensor", rel + " not in archive");
    return it->second;
  };
}

EncoderConfig read_model_config(const FileSource& src) {
  KeyValues kv = parse_key_values(bytes_text(src("model.txt")));
  const char* where = "model.txt";
  if (kv_string(kv, "format", where) != "gsim-model" || kv_int(kv, "version", where) != 1) {
    throw validation_error("unsupported format", "model.txt is not a version 1 gsim model");
  }
  EncoderConfig cfg;
  cfg.hidden = positive(kv, "hidden", where);
  cfg.heads = positive(kv, "heads", where);
  cfg.ffn = positive(kv, "ffn", where);
  cfg.max_seq = positive(kv, "max_seq", where);
  cfg.layers = positive(kv, "layers", where);
  cfg.check();
  return cfg;
}

LinearParams read_linear(const FileSource& src, const std::string& module) {
  KeyValues kv = read_meta(src, module, "linear");
  LinearParams p;
  p.in_dim = positive(kv, "in_dim", module);
  p.out_dim = positive(kv, "out_dim", module);
  p.in_scale = kv_double(kv, "in_scale", module);
  p.weight_scale = kv_double(kv, "weight_scale", module);
  p.out_scale = kv_double(kv, "out_scale", module);
  std::vector<uint8_t> w = src(module + "/weight.i8");
  if (w.size() != size_t(p.in_dim) * p.out_dim) {
    throw validation_error("shape mismatch", module + "/weight.i8 holds " +
                                                 std::to_string(w.size()) + " values, expected " +
                                                 std::to_string(size_t(p.in_dim) * p.out_dim));
  }
  p.weight.assign(w.begin(), w.end());
  std::vector<uint8_t> b = src(module + "/bias.i32");
  if (b.size() != size_t(p.out_dim) * 4) {
    throw validation_error("shape mismatch", module + "/bias.i32 holds " +
                                                 std::to_string(b.size()) + " bytes, expected " +
                                                 std::to_string(p.out_dim * 4));
  }
  p.bias.resize(p.out_dim);
  for (int j = 0; j < p.out_dim; ++j) p.bias[j] = load_le<int32_t>(b.data() + 4 * j);
  ibert::check_linear_params(p, module.c_str());
  return p;
}

LayerNormParams read_layernorm(const FileSource& src, const std::string& module) {
  KeyValues kv = read_meta(src, module, "layernorm");
  LayerNormParams p;
  p.dim = positive(kv, "dim", module);
  p.main_scale = kv_double(kv, "main_scale", module);
  p.residual_scale = kv_double(kv, "residual_scale", module);
  p.input_scale = kv_double(kv, "input_scale", module);
  p.shift = static_cast<int>(kv_int(kv, "shift", module));
  p.out_scale = kv_double(kv, "out_scale", module);
  p.gamma = read_floats(src, module + "/gamma.f32", p.dim);
  p.beta = read_floats(src, module + "/beta.f32", p.dim);
  ibert::check_layernorm_params(p, module.c_str());
  return p;
}

AttentionParams read_attention(const FileSource& src, const std::string& module) {
  KeyValues kv = read_meta(src, module, "attention");
  AttentionParams p;
  p.heads = positive(kv, "heads", module);
  p.head_dim = positive(kv, "head_dim", module);
  p.context_scale = kv_double(kv, "context_scale", module);
  if (!(p.context_scale > 0)) {
    throw validation_error("malformed field", module + ": context_scale must be positive");
  }
  return p;
}

ModuleInfo read_module_info(const FileSource& src, const std::string& module) {
  KeyValues kv = parse_key_values(bytes_text(src(module + "/meta.txt")));
  ModuleInfo m;
  m.kind = kv_string(kv, "kind", module);
  if (m.kind == "linear") {
    m.in_dim = positive(kv, "in_dim", module);
    m.out_dim = positive(kv, "out_dim", module);
    m.out_scale = kv_double(kv, "out_scale", module);
  } else if (m.kind == "layernorm") {
    m.in_dim = m.out_dim = positive(kv, "dim", module);
    m.out_scale = kv_double(kv, "out_scale", module);
  } else if (m.kind == "attention") {
    m.heads = positive(kv, "heads", module);
    m.in_dim = m.out_dim = m.heads * positive(kv, "head_dim", module);
    m.out_scale = kv_double(kv, "context_scale", module);
  } else {
    throw validation_error("malformed field", module + ": unknown module kind '" + m.kind + "'");
  }
  return m;
}

Model read_model(const FileSource& src) {
  Model m;
  m.cfg = read_model_config(src);
  for (int l = 0; l < m.cfg.layers; ++l) {
    const std::string e = encoder_dir(l);
    EncoderParams p;
    p.q = read_linear(src, e + "/q");
    p.k = read_linear(src, e + "/k");
    p.v = read_linear(src, e + "/v");
    p.attention = read_attention(src, e + "/attention");
    p.attn_out = read_linear(src, e + "/attn_out");
    p.ln1 = read_layernorm(src, e + "/ln1");
    p.ffn1 = read_linear(src, e + "/ffn1");
    p.ffn2 = read_linear(src, e + "/ffn2");
    p.ln2 = read_layernorm(src, e + "/ln2");
    p.in_scale = p.q.in_scale;
    try {
      ibert::check_encoder_params(p, m.cfg);
    } catch (const Error& err) {
      throw Error(err.category(), err.kind(), e + ": " + err.detail());
    }
    m.layers.push_back(std::move(p));
  }
  return m;
}

Model read_model_fs(const std::filesystem::path& dir) { return read_model(directory_source(dir)); }

std::vector<uint8_t> encode_archive(const FileMap& files) {
  std::vector<uint8_t> out;
  append_le<uint32_t>(out, kArchiveMagic);
  append_le<uint32_t>(out, kArchiveVersion);
  append_le<uint32_t>(out, static_cast<uint32_t>(files.size()));
  for (const auto& [name, data] : files) {
    append_le<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    append_le<uint64_t>(out, data.size());
    out.insert(out.end(), data.begin(), data.end());
  }
  return out;
}

FileMap decode_archive(const std::vector<uint8_t>& bytes) {
  size_t pos = 0;
  auto need = [&](size_t n) {
    if (bytes.size() - pos < n) throw validation_error("malformed archive", "truncated archive");
  };
  need(12);
  if (load_le<uint32_t>(bytes.data()) != kArchiveMagic) {
    throw validation_error("malformed archive", "bad magic");
  }
  if (load_le<uint32_t>(bytes.data() + 4) != kArchiveVersion) {
    throw validation_error("unsupported format", "archive version is not 1");
  }
  uint32_t count = load_le<uint32_t>(bytes.data() + 8);
  pos = 12;
  FileMap files;
  for (uint32_t i = 0; i < count; ++i) {
    need(4);
    uint32_t len = load_le<uint32_t>(bytes.data() + pos);
    pos += 4;
    need(len);
    std::string name(bytes.begin() + pos, bytes.begin() + pos + len);
    pos += len;
    if (name.empty() || name.find("..") != std::string::npos || name.front() == '/') {
      throw validation_error("malformed archive", "unsafe entry name '" + name + "'");
    }
    need(8);
    uint64_t size = load_le<uint64_t>(bytes.data() + pos);
    pos += 8;
    need(size);
    files[name].assign(bytes.begin() + pos, bytes.begin() + pos + size);
    pos += size;
  }
  if (pos != bytes.size()) throw validation_error("malformed archive", "trailing bytes");
  return files;
}

void write_archive(const std::filesystem::path& path, const Model& model) {
  write_file(path, encode_archive(model_files(model)));
}

Model import_model(const std::filesystem::path& archive, const std::filesystem::path& out_dir,
                   const std::optional<EncoderConfig>& expected) {
  FileMap files = decode_archive(read_file(archive));
  Model m = read_model(map_source(files));
  if (expected && !(*expected == m.cfg)) {
    throw validation_error("shape mismatch", "archive dimensions differ from the expected config");
  }
  // Rewrite from the parsed model so the tree holds exactly the known files.
  write_model_fs(out_dir, m);
  return m;
}

}  // namespace gsim::builder
