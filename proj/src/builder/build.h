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

#ifndef GSIM_BUILDER_BUILD_H_
#define GSIM_BUILDER_BUILD_H_

#include <filesystem>
#include <string>
#include <vector>

#include "builder/description.h"
#include "builder/model_fs.h"
#include "builder/plan.h"

namespace gsim::builder {

// Turns descriptions plus a model file system into a validated plan.
//   - every layer except source and sink lands in exactly one cluster
//   - kernel 0 of each cluster is its gateway; inbound inter-cluster
//     streams with one consumer are forwarded, others fan out through a
//     virtual broadcast hosted in the gateway
//   - local fan-out gets a broadcast kernel, attention gets Q/K/V scatters
//     and a head gather, a column-partitioned Linear a broadcast and gather
//   - ids: gateway, compute kernels in layer order, virtual kernels, then
//     communication kernels
// Throws validation errors for malformed descriptions, cycles, and clusters
// or kernel counts past 256.
ClusterPlan build(const LayerDescription& layers, const ClusterDescription& clusters,
                  const std::string& model_fs, const FileSource& source);
ClusterPlan build(const LayerDescription& layers, const ClusterDescription& clusters,
                  const std::filesystem::path& model_fs);

// Structural checks; an empty list means the plan is deployable.
std::vector<std::string> validate(const ClusterPlan& plan);

// Stub source outlines, one file per physical kernel, under
// dir/cluster_<c>/. Returns the files written.
std::vector<std::filesystem::path> emit_skeleton(const ClusterPlan& plan,
                                                 const std::filesystem::path& dir);

}  // namespace gsim::builder

#endif  // GSIM_BUILDER_BUILD_H_
