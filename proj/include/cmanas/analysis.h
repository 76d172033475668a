// Copyright 2026 The cmanas Authors.
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

#ifndef CMANAS_ANALYSIS_H_
#define CMANAS_ANALYSIS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "cmanas/driver.h"

namespace cmanas {

enum class PlotKind { kUniquePerGen, kMeanProgression, kOpFrequency, kCacheStats };

std::string_view PlotKindName(PlotKind kind);

using PlotCell = std::variant<std::int64_t, double, std::string>;

// Flat labeled table; exported as {"kind", "columns", "rows", "meta"}.
struct PlotData {
  PlotKind kind = PlotKind::kUniquePerGen;
  std::vector<std::string> columns;
  std::vector<std::vector<PlotCell>> rows;
  nlohmann::json meta = nlohmann::json::object();
};

nlohmann::json PlotDataToJson(const PlotData& data);

// [generation, unique_count]: distinct keys first sampled in that generation.
PlotData UniquePerGeneration(const Trace& trace);

// [generation, cell, edge, source, target, op, weight]: softmax of the
// recorded mean, one row per (generation, edge, op). The footer's final mean
// appears as generation N_gen. Throws MissingSnapshotError without snapshots.
PlotData MeanProgression(const Trace& trace);

// [op, count] over the kept edges of the k fittest distinct genotypes seen in
// the trace (ties: earliest first sample). meta.truncated is set when fewer
// than k genotypes exist.
PlotData TopKOpFrequency(const Trace& trace, int k);

// [generation, cumulative_samples, cumulative_unique, cumulative_calls,
//  unique_ratio]; meta.final_ratio = unique / total samples.
PlotData CacheStats(const Trace& trace);

}  // namespace cmanas

#endif  // CMANAS_ANALYSIS_H_
