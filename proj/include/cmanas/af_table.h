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

#ifndef CMANAS_AF_TABLE_H_
#define CMANAS_AF_TABLE_H_

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "json.hpp"
#include "cmanas/evaluator.h"
#include "cmanas/search_space.h"

namespace cmanas {

// Architecture-fitness table: memoizes evaluator results by canonical key.
//
// Lookup and Commit are the two halves of lookup-or-evaluate; the evaluation
// in between runs unlocked, so concurrent callers may evaluate the same key
// twice. Deterministic evaluators make that harmless. Counters are exact
// under serial use.
class AFTable {
 public:
  AFTable() = default;
  AFTable(const AFTable& other);
  AFTable& operator=(const AFTable& other);

  // Counts a lookup and a hit when the key is present; counts nothing when
  // absent (the following Commit counts the miss).
  std::optional<double> Lookup(const std::string& key);
  // Stores a freshly evaluated value, counting a lookup and a miss. An
  // existing entry is kept.
  void Commit(const std::string& key, double fitness);
  // Read-only probe, no counters.
  std::optional<double> Peek(const std::string& key) const;

  std::uint64_t lookups() const;
  std::uint64_t hits() const;
  std::uint64_t misses() const;
  std::size_t size() const;

  // {"entries": {key: fitness}, "hits": h, "misses": m}
  nlohmann::json ToJson() const;
  static AFTable FromJson(const nlohmann::json& doc);

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, double> entries_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

// Returns the cached value on a hit without calling the evaluator; otherwise
// evaluates, stores and returns. Evaluator exceptions propagate and nothing is
// cached.
double AfLookupOrEvaluate(const Genotype& genotype,
                          const FitnessEvaluator& evaluator, AFTable& table);

}  // namespace cmanas

#endif  // CMANAS_AF_TABLE_H_
