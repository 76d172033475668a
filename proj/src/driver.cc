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

#include "cmanas/driver.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "cmanas/af_table.h"
#include "cmanas/cmaes.h"
#include "cmanas/errors.h"

namespace cmanas {

namespace {

struct GenerationEval {
  std::vector<double> fitnesses;
  int hits = 0;
  int calls = 0;
};

// Runs task(i) for i in [0, count) on up to `workers` threads. The first
// exception is rethrown after all threads finish.
template <typename Task>
void ParallelFor(int count, int workers, Task&& task) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> threads;
    const int spawn = std::min(workers, count);
    for (int w = 0; w < spawn; ++w) {
      threads.emplace_back([&] {
        for (int i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// Evaluates one generation with serial lookup-or-evaluate semantics: the
// first occurrence of an unknown key is a miss, every later one a hit. Only
// the misses are dispatched to workers, and nothing is committed unless all of
// them succeed.
GenerationEval EvaluateGeneration(const std::vector<Genotype>& genotypes,
                                  const std::vector<std::string>& keys,
                                  const FitnessEvaluator& evaluator,
                                  AFTable* table, int workers) {
  const int count = static_cast<int>(genotypes.size());
  GenerationEval out;
  out.fitnesses.assign(count, 0.0);
  if (table == nullptr) {
    ParallelFor(count, workers, [&](int i) {
      out.fitnesses[i] = evaluator.Evaluate(genotypes[i]);
    });
    out.calls = count;
    return out;
  }

  std::vector<int> pending;
  std::unordered_set<std::string> pending_keys;
  for (int i = 0; i < count; ++i) {
    if (!table->Peek(keys[i]) && pending_keys.insert(keys[i]).second) {
      pending.push_back(i);
    }
  }
  std::vector<double> fresh(pending.size());
  ParallelFor(static_cast<int>(pending.size()), workers, [&](int j) {
    fresh[j] = evaluator.Evaluate(genotypes[pending[j]]);
  });
  std::size_t next_fresh = 0;
  for (int i = 0; i < count; ++i) {
    if (const auto cached = table->Lookup(keys[i])) {
      out.fitnesses[i] = *cached;
      ++out.hits;
      continue;
    }
    // Not cached, so this is the first occurrence of a pending key.
    out.fitnesses[i] = fresh[next_fresh++];
    table->Commit(keys[i], out.fitnesses[i]);
    ++out.calls;
  }
  return out;
}

template <typename E>
[[noreturn]] void RethrowWithGeneration(const E& error, int generation) {
  throw E("generation " + std::to_string(generation) + ": " + error.what());
}

SearchResult RunLoop(const SearchConfig& config,
                     const FitnessEvaluator& evaluator, SearchMode mode) {
  if (config.generations < 0) throw ConfigError("generations must be >= 0");
  if (config.workers < 1) throw ConfigError("workers must be >= 1");
  const SearchSpaceSpec& space = evaluator.space();
  const int n = Dimension(space);
  const cmaes::CmaParams params =
      config.population > 0 ? cmaes::ParamsForPopulation(n, config.population)
                            : cmaes::DefaultParams(n);
  cmaes::ValidateParams(params);
  cmaes::CmaState state = cmaes::InitState(n, config.sigma0);
  std::mt19937_64 rng(config.seed);

  Trace trace{.config = config, .space = space};
  trace.evaluator = evaluator.Descriptor();
  trace.dimension = n;
  trace.n_pop = params.n_pop;

  std::optional<AFTable> table;
  if (config.use_af_table) table.emplace();
  std::unordered_map<std::string, double> sampled;
  std::string best_key;
  Genotype best_genotype;
  double best_fitness = 0;
  bool have_best = false;

  for (int g = 0; g < config.generations; ++g) {
    const auto start = std::chrono::steady_clock::now();
    GenerationRecord record;
    record.generation = g;
    record.sigma = state.sigma;
    if (config.snapshot_mean) {
      record.distribution = cmaes::StateSnapshot(state, config.snapshot_full_cov);
    }

    const auto population = cmaes::SamplePopulation(state, params, rng);
    std::vector<Genotype> genotypes;
    genotypes.reserve(population.size());
    for (const auto& alpha : population) {
      genotypes.push_back(MapToGenotype(alpha, space));
      record.keys.push_back(CanonicalKey(genotypes.back(), space));
    }

    GenerationEval eval;
    try {
      eval = EvaluateGeneration(genotypes, record.keys, evaluator,
                                table ? &*table : nullptr, config.workers);
      cmaes::RankDescending(eval.fitnesses);
    } catch (const MissingEntryError& e) {
      RethrowWithGeneration(e, g);
    } catch (const NonFiniteFitnessError& e) {
      RethrowWithGeneration(e, g);
    } catch (const EvaluatorError& e) {
      RethrowWithGeneration(e, g);
    }
    record.fitnesses = eval.fitnesses;
    record.cache_hits = eval.hits;
    record.evaluator_calls = eval.calls;

    std::unordered_set<std::string> fresh_keys;
    for (std::size_t i = 0; i < genotypes.size(); ++i) {
      const std::string& key = record.keys[i];
      if (sampled.emplace(key, record.fitnesses[i]).second) fresh_keys.insert(key);
      if (!have_best || record.fitnesses[i] > best_fitness) {
        have_best = true;
        best_fitness = record.fitnesses[i];
        best_key = key;
        best_genotype = genotypes[i];
      }
    }
    record.unique_new = static_cast<int>(fresh_keys.size());
    record.best_key = best_key;
    record.best_fitness = best_fitness;

    if (mode == SearchMode::kCmaes) {
      state = cmaes::Step(state, params, population, record.fitnesses);
    }
    if (config.record_timing) {
      record.wall_seconds = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count();
    }
    trace.total_samples += static_cast<std::int64_t>(genotypes.size());
    trace.evaluator_calls += record.evaluator_calls;
    trace.records.push_back(std::move(record));
  }

  SearchResult result{.genotype = {}, .trace = std::move(trace)};
  Trace& out = result.trace;
  if (mode == SearchMode::kCmaes || !have_best) {
    result.genotype = MapToGenotype(state.mean, space);
  } else {
    result.genotype = best_genotype;
  }
  out.final_key = CanonicalKey(result.genotype, space);
  if (const auto it = sampled.find(out.final_key); it != sampled.end()) {
    out.final_fitness = it->second;
  } else {
    out.final_fitness = evaluator.Evaluate(result.genotype);
    out.final_extra_evaluation = true;
  }
  if (config.snapshot_mean) {
    out.final_distribution = cmaes::StateSnapshot(state, config.snapshot_full_cov);
  }
  out.distinct_keys = static_cast<std::int64_t>(sampled.size());
  return result;
}

}  // namespace

std::string_view SearchModeName(SearchMode mode) {
  return mode == SearchMode::kCmaes ? "cmaes" : "random";
}

SearchMode ParseSearchMode(std::string_view name) {
  if (name == "cmaes") return SearchMode::kCmaes;
  if (name == "random") return SearchMode::kRandom;
  throw ConfigError("unknown search mode '" + std::string(name) + "'");
}

SearchResult RunCmanas(const SearchConfig& config,
                       const FitnessEvaluator& evaluator) {
  if (config.mode != SearchMode::kCmaes) throw ConfigError("RunCmanas needs mode cmaes");
  return RunLoop(config, evaluator, SearchMode::kCmaes);
}

SearchResult RunRandom(const SearchConfig& config,
                       const FitnessEvaluator& evaluator) {
  if (config.mode != SearchMode::kRandom) throw ConfigError("RunRandom needs mode random");
  return RunLoop(config, evaluator, SearchMode::kRandom);
}

SearchResult RunSearch(const SearchConfig& config,
                       const FitnessEvaluator& evaluator) {
  return config.mode == SearchMode::kCmaes ? RunCmanas(config, evaluator)
                                           : RunRandom(config, evaluator);
}

}  // namespace cmanas
