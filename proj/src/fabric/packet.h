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

#ifndef GSIM_FABRIC_PACKET_H_
#define GSIM_FABRIC_PACKET_H_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gsim::fabric {

inline constexpr int kMaxClusters = 256;
inline constexpr int kMaxKernelsPerCluster = 256;
inline constexpr size_t kFlitBytes = 64;
inline constexpr size_t kHeaderBytes = 8;

// Hierarchical kernel address: 8-bit cluster id, 8-bit kernel id within the
// cluster. Kernel 0 is the gateway of any cluster that talks to others.
struct KernelAddress {
  uint8_t cluster = 0;
  uint8_t kernel = 0;

  auto operator<=>(const KernelAddress&) const = default;
  std::string str() const;
};

// Opaque network address of a simulated node (one FPGA).
using NodeId = uint32_t;

struct Flit {
  std::array<uint8_t, kFlitBytes> payload{};
  bool last = false;
};

// Packet metadata. On the wire it is a 64-bit little-endian word:
//   bits  0..7   receiver_id (kernel id, or cluster id when inter_cluster)
//   bits  8..15  sender_id
//   bit  16      inter_cluster (the TUSER bit selecting the gateway table)
//   bit  17      end_of_frame (last row of a streamed matrix)
//   bits 18..23  reserved, must be zero
//   bits 24..31  sender_cluster
//   bits 32..63  message_size in bytes
struct GalapagosHeader {
  uint8_t sender_id = 0;
  uint8_t sender_cluster = 0;
  uint8_t receiver_id = 0;
  bool inter_cluster = false;
  bool end_of_frame = false;
  uint32_t message_size = 0;

  bool operator==(const GalapagosHeader&) const = default;
};

std::array<uint8_t, kHeaderBytes> encode_header(const GalapagosHeader& h);
// Throws a validation error when reserved bits are set or the span is short.
GalapagosHeader decode_header(std::span<const uint8_t> bytes);

struct GalapagosPacket {
  GalapagosHeader header;
  std::vector<uint8_t> payload;  // header.message_size bytes
};

size_t flit_count(size_t bytes);
std::vector<Flit> to_flits(std::span<const uint8_t> payload);
std::vector<uint8_t> from_flits(std::span<const Flit> flits, size_t message_size);

// One-byte GMI header naming the destination kernel inside the target
// cluster. Only inter-cluster messages carry it.
std::vector<uint8_t> attach_gmi_header(std::span<const uint8_t> payload,
                                       int dest_kernel_id);
std::pair<uint8_t, std::vector<uint8_t>> strip_gmi_header(
    std::span<const uint8_t> payload);

}  // namespace gsim::fabric

#endif  // GSIM_FABRIC_PACKET_H_
