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

#include "cmanas/analysis.h"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "cmanas/errors.h"
#include "cmanas/search_space.h"

namespace cmanas {

namespace {

ArchParam MeanOf(const nlohmann::json& distribution, int dimension) {
  const auto values = distribution.at("mean").get<std::vector<double>>();
  if (static_cast<int>(values.size()) != dimension) {
    throw MissingSnapshotError("mean snapshot has the wrong dimension");
  }
  return Eigen::Map<const ArchParam>(values.data(), dimension);
}

void AppendWeights(const SearchSpaceSpec& space, const ArchParam& mean,
                   std::int64_t generation, PlotData& data) {
  const RowMatrix weights = SoftmaxRows(mean, space);
  for (std::size_t c = 0; c < space.cells().size(); ++c) {
    const CellSpec& cell = space.cells()[c];
    const int offset = space.edge_offset(static_cast<int>(c));
    for (std::size_t e = 0; e < cell.edges.size(); ++e) {
      for (int op = 0; op < space.ops().size(); ++op) {
        data.rows.push_back({generation, cell.name, static_cast<std::int64_t>(e),
                             static_cast<std::int64_t>(cell.edges[e].source),
                             static_cast<std::int64_t>(cell.edges[e].target),
                             space.ops().name(op),
                             weights(offset + static_cast<int>(e), op)});
      }
    }
  }
}

}  // namespace

std::string_view PlotKindName(PlotKind kind) {
  switch (kind) {
    case PlotKind::kUniquePerGen:
      return "unique_per_gen";
    case PlotKind::kMeanProgression:
      return "mean_progression";
    case PlotKind::kOpFrequency:
      return "op_frequency";
    case PlotKind::kCacheStats:
      return "cache_stats";
  }
  return "unknown";
}

nlohmann::json PlotDataToJson(const PlotData& data) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : data.rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& cell : row) {
      std::visit([&out](const auto& value) { out.push_back(value); }, cell);
    }
    rows.push_back(std::move(out));
  }
  return {{"kind", PlotKindName(data.kind)},
          {"columns", data.columns},
          {"rows", std::move(rows)},
          {"meta", data.meta}};
}

PlotData UniquePerGeneration(const Trace& trace) {
  PlotData data{.kind = PlotKind::kUniquePerGen,
                .columns = {"generation", "unique_count"}};
  std::unordered_set<std::string> seen;
  for (const auto& record : trace.records) {
    std::int64_t fresh = 0;
    for (const auto& key : record.keys) fresh += seen.insert(key).second ? 1 : 0;
    data.rows.push_back({static_cast<std::int64_t>(record.generation), fresh});
  }
  data.meta["distinct_total"] = static_cast<std::int64_t>(seen.size());
  return data;
}

PlotData MeanProgression(const Trace& trace) {
  PlotData data{.kind = PlotKind::kMeanProgression,
                .columns = {"generation", "cell", "edge", "source", "target",
                            "op", "weight"}};
  const int n = Dimension(trace.space);
  for (const auto& record : trace.records) {
    if (!record.distribution) {
      throw MissingSnapshotError("generation " + std::to_string(record.generation) +
                                 " has no mean snapshot; search with --snapshot-mean");
    }
    AppendWeights(trace.space, MeanOf(*record.distribution, n), record.generation,
                  data);
  }
  if (!trace.final_distribution) {
    throw MissingSnapshotError("trace has no final mean snapshot");
  }
  AppendWeights(trace.space, MeanOf(*trace.final_distribution, n),
                static_cast<std::int64_t>(trace.records.size()), data);
  return data;
}

PlotData TopKOpFrequency(const Trace& trace, int k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  struct Candidate {
    std::string key;
    double fitness;
    std::size_t first_seen;
  };
  std::vector<Candidate> candidates;
  std::unordered_set<std::string> seen;
  for (const auto& record : trace.records) {
    for (std::size_t i = 0; i < record.keys.size(); ++i) {
      if (seen.insert(record.keys[i]).second) {
        candidates.push_back({record.keys[i], record.fitnesses[i], candidates.size()});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.fitness != b.fitness) return a.fitness > b.fitness;
              return a.first_seen < b.first_seen;
            });
  const std::size_t used = std::min<std::size_t>(k, candidates.size());
  std::vector<std::int64_t> counts(trace.space.ops().size(), 0);
  for (std::size_t i = 0; i < used; ++i) {
    const Genotype genotype = ParseKey(candidates[i].key, trace.space);
    for (const auto& cell : genotype.cells) {
      for (int op : cell) {
        if (op != kDroppedEdge) ++counts[op];
      }
    }
  }
  PlotData data{.kind = PlotKind::kOpFrequency, .columns = {"op", "count"}};
  for (int op = 0; op < trace.space.ops().size(); ++op) {
    data.rows.push_back({trace.space.ops().name(op), counts[op]});
  }
  data.meta = {{"k", k},
               {"genotypes", static_cast<std::int64_t>(used)},
               {"truncated", used < static_cast<std::size_t>(k)}};
  return data;
}

PlotData CacheStats(const Trace& trace) {
  PlotData data{.kind = PlotKind::kCacheStats,
                .columns = {"generation", "cumulative_samples", "cumulative_unique",
                            "cumulative_calls", "unique_ratio"}};
  std::unordered_set<std::string> seen;
  std::int64_t samples = 0;
  std::int64_t calls = 0;
  for (const auto& record : trace.records) {
    for (const auto& key : record.keys) seen.insert(key);
    samples += static_cast<std::int64_t>(record.keys.size());
    calls += record.evaluator_calls;
    const auto unique = static_cast<std::int64_t>(seen.size());
    data.rows.push_back({static_cast<std::int64_t>(record.generation), samples,
                         unique, calls,
                         samples > 0 ? static_cast<double>(unique) / samples : 1.0});
  }
  const auto unique = static_cast<std::int64_t>(seen.size());
  data.meta = {{"total_samples", samples},
               {"unique", unique},
               {"evaluator_calls", calls},
               {"final_ratio",
                samples > 0 ? static_cast<double>(unique) / samples : 1.0}};
  return data;
}

}  // namespace cmanas
