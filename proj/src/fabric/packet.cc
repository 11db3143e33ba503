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

#include "fabric/packet.h"

#include <algorithm>

#include "common/error.h"
#include "common/io.h"

namespace gsim::fabric {

std::string KernelAddress::str() const {
  return std::to_string(cluster) + "." + std::to_string(kernel);
}

std::array<uint8_t, kHeaderBytes> encode_header(const GalapagosHeader& h) {
  uint64_t word = uint64_t{h.receiver_id} | (uint64_t{h.sender_id} << 8) |
                  (uint64_t{h.inter_cluster} << 16) |
                  (uint64_t{h.end_of_frame} << 17) |
                  (uint64_t{h.sender_cluster} << 24) |
                  (uint64_t{h.message_size} << 32);
  std::array<uint8_t, kHeaderBytes> out{};
  for (size_t i = 0; i < kHeaderBytes; ++i) out[i] = static_cast<uint8_t>(word >> (8 * i));
  return out;
}

GalapagosHeader decode_header(std::span<const uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) {
    throw validation_error("encoding error", "header needs 8 bytes, got " +
                                                 std::to_string(bytes.size()));
  }
  uint64_t word = load_le<uint64_t>(bytes.data());
  if ((word >> 18) & 0x3f) {
    throw validation_error("encoding error", "reserved header bits set");
  }
  GalapagosHeader h;
  h.receiver_id = static_cast<uint8_t>(word);
  h.sender_id = static_cast<uint8_t>(word >> 8);
  h.inter_cluster = (word >> 16) & 1;
  h.end_of_frame = (word >> 17) & 1;
  h.sender_cluster = static_cast<uint8_t>(word >> 24);
  h.message_size = static_cast<uint32_t>(word >> 32);
  return h;
}

size_t flit_count(size_t bytes) {
  return std::max<size_t>(1, (bytes + kFlitBytes - 1) / kFlitBytes);
}

std::vector<Flit> to_flits(std::span<const uint8_t> payload) {
  std::vector<Flit> flits(flit_count(payload.size()));
  for (size_t i = 0; i < payload.size(); ++i) {
    flits[i / kFlitBytes].payload[i % kFlitBytes] = payload[i];
  }
  flits.back().last = true;
  return flits;
}

std::vector<uint8_t> from_flits(std::span<const Flit> flits, size_t message_size) {
  if (flits.size() != flit_count(message_size) || !flits.back().last) {
    throw validation_error("encoding error", "flit framing does not match message size");
  }
  std::vector<uint8_t> out(message_size);
  for (size_t i = 0; i < message_size; ++i) {
    out[i] = flits[i / kFlitBytes].payload[i % kFlitBytes];
  }
  return out;
}

std::vector<uint8_t> attach_gmi_header(std::span<const uint8_t> payload,
                                       int dest_kernel_id) {
  if (dest_kernel_id < 0 || dest_kernel_id > 255) {
    throw validation_error("encoding error", "GMI destination kernel " +
                                                 std::to_string(dest_kernel_id) +
                                                 " outside 0..255");
  }
  std::vector<uint8_t> out;
  out.reserve(payload.size() + 1);
  out.push_back(static_cast<uint8_t>(dest_kernel_id));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::pair<uint8_t, std::vector<uint8_t>> strip_gmi_header(
    std::span<const uint8_t> payload) {
  if (payload.empty()) {
    throw validation_error("encoding error", "empty message has no GMI header");
  }
  return {payload[0], std::vector<uint8_t>(payload.begin() + 1, payload.end())};
}

}  // namespace gsim::fabric
