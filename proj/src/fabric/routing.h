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

#ifndef GSIM_FABRIC_ROUTING_H_
#define GSIM_FABRIC_ROUTING_H_

#include <cstddef>
#include <cstdint>
#include <map>

#include "fabric/packet.h"

namespace gsim::fabric {

// Per-node routing state. The local table covers the node's own cluster; the
// gateway table holds one entry per foreign cluster (the node hosting that
// cluster's kernel 0). The node's own cluster never appears in the gateway
// table, so N clusters of N kernels cost 2N - 1 entries.
struct RoutingTables {
  uint8_t cluster = 0;
  std::map<uint8_t, NodeId> local;
  std::map<uint8_t, NodeId> gateways;

  size_t stored_addresses() const { return local.size() + gateways.size(); }
  bool operator==(const RoutingTables&) const = default;
};

// Selects the table with the inter-cluster bit. Throws a simulation error of
// kind "routing fault" when the entry is missing.
NodeId route(const GalapagosHeader& header, const RoutingTables& tables);

}  // namespace gsim::fabric

#endif  // GSIM_FABRIC_ROUTING_H_
