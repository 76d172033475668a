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

#ifndef CMANAS_EVALUATOR_H_
#define CMANAS_EVALUATOR_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "cmanas/search_space.h"

namespace cmanas {

// Fitness oracle over genotypes. Implementations are deterministic, return
// values in [0, 1], and are safe to call concurrently.
class FitnessEvaluator {
 public:
  virtual ~FitnessEvaluator() = default;

  virtual double Evaluate(const Genotype& genotype) const = 0;
  // Identifies backend plus seed or path, e.g. "synthetic:seed=7:beta=0.3".
  virtual std::string Descriptor() const = 0;
  virtual const SearchSpaceSpec& space() const = 0;
};

// Seeded stand-in landscape: per-(edge, op) utilities plus optional
// beta-weighted pairwise interactions between edges, affinely normalized by
// analytic bounds into [0, 1].
class SyntheticBenchmark : public FitnessEvaluator {
 public:
  SyntheticBenchmark(SearchSpaceSpec space, std::uint64_t seed, double beta);

  double Evaluate(const Genotype& genotype) const override;
  std::string Descriptor() const override;
  const SearchSpaceSpec& space() const override { return space_; }

  // Unnormalized score; Evaluate maps [lower_bound, upper_bound] onto [0, 1].
  double RawScore(const Genotype& genotype) const;
  double lower_bound() const { return lower_; }
  double upper_bound() const { return upper_; }

  std::uint64_t seed() const { return seed_; }
  double beta() const { return beta_; }
  // Global edge index = space().edge_offset(cell) + edge.
  double unary(int edge, int op) const;
  // Requires edge_a < edge_b; zero when beta == 0.
  double pairwise(int edge_a, int op_a, int edge_b, int op_b) const;

 private:
  std::size_t PairBase(int edge_a, int edge_b) const;

  SearchSpaceSpec space_;
  std::uint64_t seed_;
  double beta_;
  int op_count_;
  std::vector<double> unary_;     // [edge][op]
  std::vector<double> pairwise_;  // [pair(a<b)][op_a][op_b]
  double lower_ = 0;
  double upper_ = 1;
};

SyntheticBenchmark GenSynthetic(const SearchSpaceSpec& space, std::uint64_t seed,
                                double beta);

// File-backed lookup table keyed by canonical genotype key.
class TabularBenchmark : public FitnessEvaluator {
 public:
  TabularBenchmark(SearchSpaceSpec space, std::map<std::string, double> entries,
                   nlohmann::json meta = nlohmann::json::object(),
                   std::string descriptor = "tabular");

  // Throws MissingEntryError for keys not in the table.
  double Evaluate(const Genotype& genotype) const override;
  std::string Descriptor() const override { return descriptor_; }
  const SearchSpaceSpec& space() const override { return space_; }

  const std::map<std::string, double>& entries() const { return entries_; }
  const nlohmann::json& meta() const { return meta_; }

 private:
  SearchSpaceSpec space_;
  std::map<std::string, double> entries_;
  nlohmann::json meta_;
  std::string descriptor_;
};

// Benchmark JSON: {"entries": {key: fitness}, "meta": {...}, "spec": {...}}
// with keys in lexicographic order, so equal tables serialize to equal bytes.
std::string BenchmarkToString(const TabularBenchmark& bench);
void SaveBenchmark(const TabularBenchmark& bench, const std::string& path);

// Each malformation raises its own error type: MalformedJsonError,
// UnknownOperationError, FitnessOutOfRangeError, DuplicateKeyError.
TabularBenchmark ParseBenchmark(const std::string& text,
                                const std::string& descriptor = "tabular");
TabularBenchmark LoadBenchmark(const std::string& path);

// Enumerates `evaluator` over its whole space into a table.
TabularBenchmark Materialize(const FitnessEvaluator& evaluator,
                             const nlohmann::json& meta,
                             std::uint64_t cap = 1'000'000);

// Lazy synthetic description: spec and generator parameters, no entries.
std::string LazySyntheticToString(const SyntheticBenchmark& bench);

// Opens either a materialized table or a lazy synthetic description.
std::unique_ptr<FitnessEvaluator> OpenBenchmarkFile(const std::string& path);

}  // namespace cmanas

#endif  // CMANAS_EVALUATOR_H_
