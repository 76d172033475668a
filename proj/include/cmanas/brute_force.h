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

#ifndef CMANAS_BRUTE_FORCE_H_
#define CMANAS_BRUTE_FORCE_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cmanas/evaluator.h"
#include "cmanas/search_space.h"

namespace cmanas {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// Number of distinct genotypes, saturated at UINT64_MAX.
std::uint64_t CountGenotypes(const SearchSpaceSpec& space);

// Visits every genotype once, in a fixed order. Throws EnumerationCapError
// (before visiting anything) when the space holds more than `cap` genotypes.
void ForEachGenotype(const SearchSpaceSpec& space, std::uint64_t cap,
                     const std::function<void(const Genotype&)>& visit);

struct RankedGenotype {
  std::string key;
  double fitness = 0;
};

struct BruteForceResult {
  Genotype best;
  std::string best_key;
  double best_fitness = 0;
  std::uint64_t enumerated = 0;
  // Fitness-descending; ties keep enumeration order. Empty unless requested.
  std::vector<RankedGenotype> ranking;
};

BruteForceResult BruteForceBest(const FitnessEvaluator& evaluator,
                                const SearchSpaceSpec& space,
                                bool keep_ranking = false,
                                std::uint64_t cap = kDefaultEnumerationCap);

// 1 + number of genotypes strictly fitter than `fitness`.
std::uint64_t RankOf(std::span<const RankedGenotype> ranking, double fitness);

}  // namespace cmanas

#endif  // CMANAS_BRUTE_FORCE_H_
