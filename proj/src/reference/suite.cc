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

#include "reference/suite.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "builder/synth.h"
#include "common/error.h"
#include "ibert/attention.h"
#include "ibert/encoder.h"
#include "ibert/linear.h"
#include "ibert/nonlinear.h"
#include "ibert/requant.h"
#include "ibert/tensor_io.h"
#include "reference/oracles.h"

namespace gsim::reference {
namespace {

using ibert::AccTensor;
using ibert::QuantTensor;
using Rng = std::mt19937_64;

double log_uniform(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
}

int pick(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng() % uint64_t(hi - lo + 1)); }

ibert::LinearParams random_linear(int in, int out, Rng& rng) {
  ibert::LinearParams p;
  p.in_dim = in;
  p.out_dim = out;
  p.weight.resize(size_t(in) * out);
  for (auto& w : p.weight) w = static_cast<int8_t>(static_cast<int>(rng() % 256) - 128);
  p.bias.resize(out);
  for (auto& b : p.bias) b = static_cast<int32_t>(rng() % 200001) - 100000;
  p.in_scale = log_uniform(rng, 1e-3, 0.1);
  p.weight_scale = log_uniform(rng, 1e-4, 1e-2);
  p.out_scale = log_uniform(rng, 1e-3, 1.0);
  return p;
}

ibert::LayerNormParams random_ln(int dim, Rng& rng) {
  ibert::LayerNormParams p;
  p.dim = dim;
  for (int j = 0; j < dim; ++j) {
    const double g = log_uniform(rng, 0.2, 2.0);
    p.gamma.push_back(static_cast<float>((rng() % 8 == 0) ? -g : g));
    p.beta.push_back(static_cast<float>((static_cast<double>(rng() % 2001) - 1000) / 2000));
  }
  p.main_scale = log_uniform(rng, 1e-3, 0.1);
  p.residual_scale = log_uniform(rng, 1e-3, 0.1);
  p.input_scale = (p.main_scale + p.residual_scale) * 128 / ((1 << 21) - 1);
  p.shift = static_cast<int>(rng() % 3);
  p.out_scale = log_uniform(rng, 1e-2, 0.2);
  return p;
}

AccTensor random_acc(int rows, int cols, int64_t spread, double scale, Rng& rng) {
  AccTensor t(rows, cols, scale);
  for (auto& v : t.data) {
    v = static_cast<int32_t>(static_cast<int64_t>(rng() % uint64_t(2 * spread + 1)) - spread);
  }
  return t;
}

// Counts differing values; returns true when all agree.
template <typename A, typename B>
bool same(const A& got, const B& want, int64_t& values) {
  values += static_cast<int64_t>(want.size());
  if (got.size() != want.size()) return false;
  for (size_t i = 0; i < want.size(); ++i) {
    if (int64_t(got[i]) != int64_t(want[i])) return false;
  }
  return true;
}

std::vector<int64_t> requant_oracle(const std::vector<int64_t>& acc, double in_scale,
                                    double out_scale) {
  std::vector<int64_t> out(acc.size());
  for (size_t i = 0; i < acc.size(); ++i) out[i] = fixedpoint_mul(acc[i], in_scale, out_scale, 8);
  return out;
}

std::vector<int64_t> gelu_oracle(const std::vector<int64_t>& acc, double in_scale,
                                 double out_scale) {
  std::vector<int64_t> out(acc.size());
  for (size_t i = 0; i < acc.size(); ++i) out[i] = gelu(acc[i], in_scale, out_scale);
  return out;
}

std::vector<int64_t> ln_oracle(const QuantTensor& main, const QuantTensor& res,
                               const ibert::LayerNormParams& p) {
  std::vector<int64_t> out;
  for (int r = 0; r < main.rows; ++r) {
    std::vector<int64_t> a(main.row(r).begin(), main.row(r).end());
    std::vector<int64_t> b(res.row(r).begin(), res.row(r).end());
    auto row = layernorm_row(a, b, p);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

// One randomized instance; returns whether implementation and oracle agree.
bool run_instance(const std::string& kernel, bool full, Rng& rng, int64_t& values,
                  ibert::EncoderConfig& enc_cfg, ibert::EncoderParams& enc, int index) {
  const int m = full ? 128 : pick(rng, 1, 32);
  if (kernel == "requant") {
    const int n = full ? 768 : pick(rng, 1, 128);
    const int bits = (rng() & 1) ? 8 : 16;
    double in = log_uniform(rng, 1e-8, 1.0);
    if (rng() & 1) in = -in;
    const double out = log_uniform(rng, 1e-4, 1.0);
    ibert::Requantizer rq(in, out, bits);
    std::vector<int64_t> got, want;
    for (int i = 0; i < m * n; ++i) {
      const int64_t z = static_cast<int64_t>(rng() % 2000001) - 1000000;
      got.push_back(rq.apply(z));
      want.push_back(fixedpoint_mul(z, in, out, bits));
    }
    return same(got, want, values);
  }
  if (kernel == "linear") {
    int in = full ? 768 : pick(rng, 1, 128);
    int out = full ? ((index % 2) ? 3072 : 768) : pick(rng, 1, 128);
    if (full && out == 3072 && index % 4 == 3) std::swap(in, out);
    const auto p = random_linear(in, out, rng);
    const QuantTensor x = ibert::random_tensor(m, in, rng(), p.in_scale);
    const AccTensor acc = ibert::linear(x, p);
    const auto ref = linear(x.data, m, p);
    const bool ok_acc = same(acc.data, ref, values);
    const QuantTensor q = ibert::requantize(acc, p.out_scale);
    return ok_acc && same(q.data, requant_oracle(ref, p.in_scale * p.weight_scale, p.out_scale),
                          values);
  }
  if (kernel == "dot_product") {
    const int d = full ? 64 : pick(rng, 1, 64);
    const QuantTensor q = ibert::random_tensor(m, d, rng());
    const QuantTensor k = ibert::random_tensor(m, d, rng());
    return same(ibert::attention_dot_product(q, k, pick(rng, 1, 12)).data, matmul_nt(q, k),
                values);
  }
  if (kernel == "softmax_matmul") {
    const int d = full ? 64 : pick(rng, 1, 64);
    const QuantTensor p = ibert::random_tensor(m, m, rng());
    const QuantTensor v = ibert::random_tensor(m, d, rng());
    return same(ibert::softmax_matmul(p, v, pick(rng, 1, 12)).data, matmul_nn(p, v), values);
  }
  if (kernel == "softmax") {
    const double s = log_uniform(rng, 1e-5, 0.5);
    const AccTensor x = random_acc(m, m, 1 + static_cast<int64_t>(rng() % 200000), s, rng);
    const QuantTensor got = ibert::IntSoftmax(s).forward(x);
    std::vector<int64_t> want;
    for (int r = 0; r < m; ++r) {
      std::vector<int64_t> row(x.data.begin() + size_t(r) * m, x.data.begin() + size_t(r + 1) * m);
      auto o = softmax_row(row, s);
      want.insert(want.end(), o.begin(), o.end());
    }
    return same(got.data, want, values);
  }
  if (kernel == "gelu") {
    const int n = full ? 3072 : pick(rng, 1, 128);
    const double in = log_uniform(rng, 1e-6, 1e-2);
    const double out = log_uniform(rng, 1e-3, 0.5);
    const auto range = static_cast<int64_t>(std::min(2e9, 8.0 / in));
    const AccTensor x = random_acc(m, n, range, in, rng);
    const QuantTensor got = ibert::IntGelu(in, out).forward(x);
    return same(got.data, gelu_oracle({x.data.begin(), x.data.end()}, in, out), values);
  }
  if (kernel == "layernorm") {
    const int dim = full ? 768 : pick(rng, 2, 128);
    const auto p = random_ln(dim, rng);
    QuantTensor a = ibert::random_tensor(m, dim, rng(), p.main_scale);
    const QuantTensor b = ibert::random_tensor(m, dim, rng(), p.residual_scale);
    // Some constant rows exercise the zero-variance path.
    if (rng() % 10 == 0) std::fill(a.data.begin(), a.data.begin() + dim, a.data[0]);
    return same(ibert::IntLayerNorm(p).forward(a, b).data, ln_oracle(a, b, p), values);
  }
  if (kernel == "encoder") {
    // Fresh parameters every 25 instances; full scale keeps one set.
    if (index % 25 == 0 && (!full || index == 0)) {
      if (full) {
        enc_cfg = ibert::EncoderConfig{};
      } else {
        static constexpr int kHidden[] = {8, 16, 32, 64, 128};
        enc_cfg.hidden = kHidden[rng() % 5];
        enc_cfg.heads = std::min(enc_cfg.hidden / 4, 1 << pick(rng, 0, 3));
        enc_cfg.ffn = enc_cfg.hidden * pick(rng, 1, 4);
        enc_cfg.max_seq = 32;
      }
      enc_cfg.layers = 1;
      enc = builder::synthesize_encoder(enc_cfg, builder::kModelInputScale, rng());
    }
    const QuantTensor x = ibert::random_tensor(m, enc_cfg.hidden, rng(), enc.in_scale);
    const QuantTensor got = ibert::encoder_forward(x, enc, enc_cfg, pick(rng, 1, 12));
    const QuantTensor want = reference::encoder_forward(x, enc, enc_cfg);
    return same(got.data, want.data, values);
  }
  throw validation_error("unknown kernel", "'" + kernel + "' is not in the kernel suite");
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<std::string> suite_kernels() {
  return {"requant", "linear", "dot_product", "softmax", "softmax_matmul", "gelu", "layernorm",
          "encoder"};
}

KernelCheck check_kernel(const std::string& kernel, int instances, bool full_size, uint64_t seed) {
  const auto names = suite_kernels();
  if (std::find(names.begin(), names.end(), kernel) == names.end()) {
    throw validation_error("unknown kernel", "'" + kernel + "' is not in the kernel suite");
  }
  if (instances < 1) throw validation_error("invalid argument", "instances must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  KernelCheck c{kernel, full_size ? "full" : "desk"};
  Rng rng(seed);
  ibert::EncoderConfig cfg;
  ibert::EncoderParams enc;
  for (int i = 0; i < instances; ++i) {
    ++c.instances;
    if (!run_instance(kernel, full_size, rng, c.values, cfg, enc, i)) ++c.mismatches;
  }
  c.seconds = since(t0);
  return c;
}

std::vector<KernelCheck> check_model(const builder::Model& model, int rows, uint64_t seed) {
  if (rows < 1 || rows > model.cfg.max_seq) {
    throw validation_error("invalid argument",
                           "rows must be in 1.." + std::to_string(model.cfg.max_seq));
  }
  std::vector<KernelCheck> out;
  Rng rng(seed);
  for (size_t l = 0; l < model.layers.size(); ++l) {
    const ibert::EncoderParams& p = model.layers[l];
    const std::string dir = builder::encoder_dir(static_cast<int>(l)) + "/";
    auto record = [&](const std::string& name, auto&& body) {
      const auto t0 = std::chrono::steady_clock::now();
      KernelCheck c{name, dir + name, 1};
      if (!body(c.values)) c.mismatches = 1;
      c.seconds = since(t0);
      out.push_back(c);
    };
    auto linear_check = [&](const std::string& name, const ibert::LinearParams& lp, bool with_gelu) {
      record(name, [&](int64_t& values) {
        const QuantTensor x = ibert::random_tensor(rows, lp.in_dim, rng(), lp.in_scale);
        const AccTensor acc = ibert::linear(x, lp);
        const auto ref = linear(x.data, rows, lp);
        const double s = lp.in_scale * lp.weight_scale;
        if (with_gelu) {
          const QuantTensor got = ibert::IntGelu(s, lp.out_scale).forward(acc);
          return same(acc.data, ref, values) &&
                 same(got.data, gelu_oracle(ref, s, lp.out_scale), values);
        }
        return same(acc.data, ref, values) &&
               same(ibert::requantize(acc, lp.out_scale).data, requant_oracle(ref, s, lp.out_scale),
                    values);
      });
    };
    linear_check("q", p.q, false);
    linear_check("k", p.k, false);
    linear_check("v", p.v, false);
    record("attention", [&](int64_t& values) {
      const int dh = p.attention.head_dim;
      const QuantTensor q = ibert::random_tensor(rows, dh, rng(), p.q.out_scale);
      const QuantTensor k = ibert::random_tensor(rows, dh, rng(), p.k.out_scale);
      const AccTensor scores = ibert::attention_dot_product(q, k, 12);
      const auto ref = matmul_nt(q, k);
      const double s = ibert::score_scale(p);
      AccTensor scaled = scores;
      scaled.scale = s;
      const QuantTensor probs = ibert::IntSoftmax(s).forward(scaled);
      std::vector<int64_t> want;
      for (int r = 0; r < rows; ++r) {
        auto o = softmax_row({ref.begin() + size_t(r) * rows, ref.begin() + size_t(r + 1) * rows}, s);
        want.insert(want.end(), o.begin(), o.end());
      }
      return same(scores.data, ref, values) && same(probs.data, want, values);
    });
    linear_check("attn_out", p.attn_out, false);
    auto ln_check = [&](const std::string& name, const ibert::LayerNormParams& lp) {
      record(name, [&](int64_t& values) {
        const QuantTensor a = ibert::random_tensor(rows, lp.dim, rng(), lp.main_scale);
        const QuantTensor b = ibert::random_tensor(rows, lp.dim, rng(), lp.residual_scale);
        return same(ibert::IntLayerNorm(lp).forward(a, b).data, ln_oracle(a, b, lp), values);
      });
    };
    ln_check("ln1", p.ln1);
    linear_check("ffn1", p.ffn1, true);
    linear_check("ffn2", p.ffn2, false);
    ln_check("ln2", p.ln2);
    record("encoder", [&](int64_t& values) {
      ibert::EncoderConfig one = model.cfg;
      one.layers = 1;
      const QuantTensor x = ibert::random_tensor(rows, model.cfg.hidden, rng(), p.in_scale);
      return same(ibert::encoder_forward(x, p, one).data,
                  reference::encoder_forward(x, p, one).data, values);
    });
  }
  return out;
}

std::string checks_csv(const std::vector<KernelCheck>& checks) {
  std::string out = "kernel,scale,instances,values,mismatches,seconds,result\n";
  for (const KernelCheck& c : checks) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.3f", c.seconds);
    out += c.kernel + "," + c.scale + "," + std::to_string(c.instances) + "," +
           std::to_string(c.values) + "," + std::to_string(c.mismatches) + "," + secs + "," +
           (c.pass() ? "PASS" : "FAIL") + "\n";
  }
  return out;
}

std::string checks_text(const std::vector<KernelCheck>& checks) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %-22s %9s %12s %10s %8s  %s\n", "kernel", "scale",
                "instances", "values", "mismatch", "seconds", "result");
  out += line;
  for (const KernelCheck& c : checks) {
    std::snprintf(line, sizeof line, "%-16s %-22s %9lld %12lld %10lld %8.3f  %s\n",
                  c.kernel.c_str(), c.scale.c_str(), static_cast<long long>(c.instances),
                  static_cast<long long>(c.values), static_cast<long long>(c.mismatches),
                  c.seconds, c.pass() ? "PASS" : "FAIL");
    out += line;
  }
  return out;
}

}  // namespace gsim::reference
