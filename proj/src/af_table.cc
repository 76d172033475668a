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

#include "cmanas/af_table.h"

#include <map>
#include <utility>

#include "cmanas/errors.h"

namespace cmanas {

AFTable::AFTable(const AFTable& other) {
  std::lock_guard lock(other.mu_);
  entries_ = other.entries_;
  hits_ = other.hits_;
  misses_ = other.misses_;
}

AFTable& AFTable::operator=(const AFTable& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  entries_ = other.entries_;
  hits_ = other.hits_;
  misses_ = other.misses_;
  return *this;
}

std::optional<double> AFTable::Lookup(const std::string& key) {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  ++hits_;
  return it->second;
}

void AFTable::Commit(const std::string& key, double fitness) {
  std::lock_guard lock(mu_);
  entries_.emplace(key, fitness);
  ++misses_;
}

std::optional<double> AFTable::Peek(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t AFTable::lookups() const {
  std::lock_guard lock(mu_);
  return hits_ + misses_;
}

std::uint64_t AFTable::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::uint64_t AFTable::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

std::size_t AFTable::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

nlohmann::json AFTable::ToJson() const {
  std::lock_guard lock(mu_);
  // Sorted for stable output.
  const std::map<std::string, double> sorted(entries_.begin(), entries_.end());
  return {{"entries", sorted}, {"hits", hits_}, {"misses", misses_}};
}

AFTable AFTable::FromJson(const nlohmann::json& doc) {
  AFTable table;
  try {
    for (const auto& [key, value] : doc.at("entries").items()) {
      table.entries_.emplace(key, value.get<double>());
    }
    table.hits_ = doc.value("hits", std::uint64_t{0});
    table.misses_ = doc.value("misses", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJsonError(std::string("AF table JSON: ") + e.what());
  }
  return table;
}

double AfLookupOrEvaluate(const Genotype& genotype,
                          const FitnessEvaluator& evaluator, AFTable& table) {
  const std::string key = CanonicalKey(genotype, evaluator.space());
  if (const auto cached = table.Lookup(key)) return *cached;
  const double fitness = evaluator.Evaluate(genotype);
  table.Commit(key, fitness);
  return fitness;
}

}  // namespace cmanas
