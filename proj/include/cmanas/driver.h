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

#ifndef CMANAS_DRIVER_H_
#define CMANAS_DRIVER_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "cmanas/evaluator.h"
#include "cmanas/search_space.h"

namespace cmanas {

enum class SearchMode { kCmaes, kRandom };

std::string_view SearchModeName(SearchMode mode);
SearchMode ParseSearchMode(std::string_view name);

struct SearchConfig {
  int generations = 100;
  SearchMode mode = SearchMode::kCmaes;
  std::uint64_t seed = 0;
  double sigma0 = 0.5;
  bool snapshot_mean = false;
  bool snapshot_full_cov = false;
  int workers = 1;
  bool use_af_table = true;
  // 0 selects the default 4 + floor(3 ln n).
  int population = 0;
  // Wall-clock timings make traces non-reproducible, so they are opt-in.
  bool record_timing = false;
};

struct GenerationRecord {
  int generation = 0;
  std::vector<std::string> keys;
  std::vector<double> fitnesses;
  int cache_hits = 0;
  int evaluator_calls = 0;
  // Distinct keys not sampled in any earlier generation.
  int unique_new = 0;
  double sigma = 0;
  std::string best_key;
  double best_fitness = 0;
  // Sampling distribution of this generation (cmaes::StateSnapshot).
  std::optional<nlohmann::json> distribution;
  std::optional<double> wall_seconds;
};

struct Trace {
  SearchConfig config;
  SearchSpaceSpec space;
  std::string evaluator;
  int dimension = 0;
  int n_pop = 0;
  std::vector<GenerationRecord> records;

  std::string final_key;
  double final_fitness = 0;
  // True when the final genotype was never sampled and cost one extra call.
  bool final_extra_evaluation = false;
  std::optional<nlohmann::json> final_distribution;
  std::int64_t total_samples = 0;
  std::int64_t evaluator_calls = 0;
  std::int64_t distinct_keys = 0;
};

struct SearchResult {
  Genotype genotype;
  Trace trace;
};

// CMA-ES architecture search: sample, map, look up or evaluate, update, for
// config.generations generations. Returns the genotype of the final mean.
SearchResult RunCmanas(const SearchConfig& config,
                       const FitnessEvaluator& evaluator);

// Ablation: the same sampling loop with the distribution frozen at its
// initial value. Returns the best sampled genotype (earliest on ties).
SearchResult RunRandom(const SearchConfig& config,
                       const FitnessEvaluator& evaluator);

// Dispatches on config.mode.
SearchResult RunSearch(const SearchConfig& config,
                       const FitnessEvaluator& evaluator);

// JSON lines: header, one object per generation, footer. Byte-stable for a
// given seed; the worker count is not echoed.
std::string TraceToJsonLines(const Trace& trace);
void WriteTraceFile(const Trace& trace, const std::string& path);
Trace ParseTrace(std::istream& in);
Trace ReadTraceFile(const std::string& path);

}  // namespace cmanas

#endif  // CMANAS_DRIVER_H_
