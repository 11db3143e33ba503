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

#include "fabric/routing.h"

#include <string>

#include "common/error.h"

namespace gsim::fabric {

NodeId route(const GalapagosHeader& header, const RoutingTables& tables) {
  if (!header.inter_cluster) {
    auto it = tables.local.find(header.receiver_id);
    if (it == tables.local.end()) {
      throw simulation_error(
          "routing fault", "no local entry for kernel " +
                               KernelAddress{tables.cluster, header.receiver_id}.str());
    }
    return it->second;
  }
  auto it = tables.gateways.find(header.receiver_id);
  if (it == tables.gateways.end()) {
    throw simulation_error("routing fault",
                           "no gateway entry for cluster " +
                               std::to_string(header.receiver_id) +
                               " in the tables of cluster " +
                               std::to_string(tables.cluster));
  }
  return it->second;
}

}  // namespace gsim::fabric
