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
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "cmanas/cmaes.h"
#include "cmanas/errors.h"

namespace cmanas {
namespace {

SearchConfig Config(int generations, std::uint64_t seed,
                    SearchMode mode = SearchMode::kCmaes) {
  SearchConfig config;
  config.generations = generations;
  config.seed = seed;
  config.mode = mode;
  return config;
}

class CountingEvaluator : public FitnessEvaluator {
 public:
  explicit CountingEvaluator(const FitnessEvaluator& inner) : inner_(inner) {}
  double Evaluate(const Genotype& g) const override {
    ++calls_;
    return inner_.Evaluate(g);
  }
  std::string Descriptor() const override { return inner_.Descriptor(); }
  const SearchSpaceSpec& space() const override { return inner_.space(); }
  int calls() const { return calls_; }

 private:
  const FitnessEvaluator& inner_;
  mutable std::atomic<int> calls_{0};
};

class DriverTest : public ::testing::Test {
 protected:
  const SyntheticBenchmark s2_{SearchSpaceSpec::S2(), 7, 0.3};
};

TEST_F(DriverTest, ZeroGenerationsReturnsInitialMeanGenotype) {
  const SearchResult r = RunCmanas(Config(0, 1), s2_);
  EXPECT_EQ(r.genotype.cells[0], std::vector<int>(6, 0));
  EXPECT_TRUE(r.trace.records.empty());
  EXPECT_TRUE(r.trace.final_extra_evaluation);
  EXPECT_EQ(r.trace.final_fitness, s2_.Evaluate(r.genotype));
  EXPECT_EQ(r.trace.final_key, "none|none|none|none|none|none");

  const SyntheticBenchmark s1(SearchSpaceSpec::S1(), 1, 0.3);
  const SearchResult r1 = RunCmanas(Config(0, 1), s1);
  EXPECT_EQ(r1.genotype, MapToGenotype(ArchParam::Zero(224), SearchSpaceSpec::S1()));
}

TEST_F(DriverTest, RecordShapesAndBestSoFar) {
  for (SearchMode mode : {SearchMode::kCmaes, SearchMode::kRandom}) {
    const SearchResult r = RunSearch(Config(40, 3, mode), s2_);
    ASSERT_EQ(r.trace.records.size(), 40u);
    EXPECT_EQ(r.trace.n_pop, 14);
    EXPECT_EQ(r.trace.dimension, 30);
    double best = -1;
    for (std::size_t g = 0; g < r.trace.records.size(); ++g) {
      const GenerationRecord& rec = r.trace.records[g];
      ASSERT_EQ(rec.generation, static_cast<int>(g));
      ASSERT_EQ(rec.keys.size(), 14u);
      ASSERT_EQ(rec.fitnesses.size(), 14u);
      ASSERT_GE(rec.best_fitness, best);
      best = rec.best_fitness;
      ASSERT_EQ(rec.best_fitness,
                std::max(best, *std::max_element(rec.fitnesses.begin(),
                                                 rec.fitnesses.end())));
      for (std::size_t i = 0; i < 14; ++i) {
        ASSERT_EQ(rec.fitnesses[i],
                  s2_.Evaluate(ParseKey(rec.keys[i], s2_.space())));
      }
    }
    EXPECT_EQ(r.trace.total_samples, 40 * 14);
  }
}

TEST_F(DriverTest, SameSeedGivesIdenticalTraces) {
  for (SearchMode mode : {SearchMode::kCmaes, SearchMode::kRandom}) {
    const std::string a = TraceToJsonLines(RunSearch(Config(30, 5, mode), s2_).trace);
    const std::string b = TraceToJsonLines(RunSearch(Config(30, 5, mode), s2_).trace);
    const std::string c = TraceToJsonLines(RunSearch(Config(30, 6, mode), s2_).trace);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
  }
}

TEST_F(DriverTest, WorkerCountDoesNotChangeTrace) {
  SearchConfig config = Config(30, 9);
  config.snapshot_mean = true;
  const std::string serial = TraceToJsonLines(RunCmanas(config, s2_).trace);
  for (int workers : {2, 3, 8}) {
    config.workers = workers;
    EXPECT_EQ(TraceToJsonLines(RunCmanas(config, s2_).trace), serial) << workers;
  }
  const SyntheticBenchmark s1(SearchSpaceSpec::S1(), 2, 0.3);
  config.generations = 5;
  config.workers = 1;
  const std::string s1_serial = TraceToJsonLines(RunCmanas(config, s1).trace);
  config.workers = 4;
  EXPECT_EQ(TraceToJsonLines(RunCmanas(config, s1).trace), s1_serial);
}

// Oracle: draw the population directly from N(0, sigma0^2 I).
TEST_F(DriverTest, RandomSingleGenerationIsBestOfIidSamples) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SearchConfig config = Config(1, seed, SearchMode::kRandom);
    config.population = 9;
    const SearchResult r = RunRandom(config, s2_);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Genotype best;
    double best_fitness = -1;
    for (int i = 0; i < 9; ++i) {
      ArchParam x(30);
      for (int j = 0; j < 30; ++j) x[j] = 0.5 * normal(rng);
      const Genotype g = MapToGenotype(x, s2_.space());
      const double f = s2_.Evaluate(g);
      if (f > best_fitness) {
        best_fitness = f;
        best = g;
      }
    }
    EXPECT_EQ(r.genotype, best);
    EXPECT_EQ(r.trace.final_fitness, best_fitness);
    EXPECT_FALSE(r.trace.final_extra_evaluation);
  }
}

TEST_F(DriverTest, RandomModeKeepsDistributionFrozen) {
  SearchConfig config = Config(10, 4, SearchMode::kRandom);
  config.snapshot_mean = true;
  const SearchResult r = RunRandom(config, s2_);
  for (const auto& rec : r.trace.records) {
    ASSERT_EQ(rec.sigma, 0.5);
    ASSERT_TRUE(rec.distribution.has_value());
    ASSERT_EQ((*rec.distribution)["mean"], std::vector<double>(30, 0.0));
  }
}

TEST_F(DriverTest, FinalKeyIsMappedFinalMean) {
  SearchConfig config = Config(25, 12);
  config.snapshot_mean = true;
  const SearchResult r = RunCmanas(config, s2_);
  ASSERT_TRUE(r.trace.final_distribution.has_value());
  const auto mean = (*r.trace.final_distribution)["mean"].get<std::vector<double>>();
  const ArchParam m = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
  EXPECT_EQ(MapToGenotype(m, s2_.space()), r.genotype);
  EXPECT_EQ(r.trace.final_key, CanonicalKey(r.genotype, s2_.space()));
  EXPECT_EQ(r.trace.final_fitness, s2_.Evaluate(r.genotype));
  EXPECT_EQ((*r.trace.final_distribution)["generation"], 25);
}

TEST_F(DriverTest, ModesUseIdenticalBudgets) {
  const SearchResult a = RunCmanas(Config(20, 8), s2_);
  const SearchResult b = RunRandom(Config(20, 8, SearchMode::kRandom), s2_);
  EXPECT_EQ(a.trace.total_samples, b.trace.total_samples);
  EXPECT_EQ(a.trace.n_pop, b.trace.n_pop);
  EXPECT_EQ(a.trace.records.size(), b.trace.records.size());
}

TEST_F(DriverTest, CallCountsMatchReplayOracle) {
  CountingEvaluator counting(s2_);
  const SearchResult r = RunCmanas(Config(60, 10), counting);
  std::set<std::string> seen;
  std::int64_t calls = 0;
  for (const auto& rec : r.trace.records) {
    std::set<std::string> fresh;
    for (const auto& key : rec.keys) {
      if (!seen.count(key)) fresh.insert(key);
    }
    ASSERT_EQ(rec.unique_new, static_cast<int>(fresh.size()));
    ASSERT_EQ(rec.evaluator_calls, static_cast<int>(fresh.size()));
    ASSERT_EQ(rec.cache_hits + rec.evaluator_calls, 14);
    seen.insert(fresh.begin(), fresh.end());
    calls += rec.evaluator_calls;
  }
  const int extra = r.trace.final_extra_evaluation ? 1 : 0;
  EXPECT_EQ(r.trace.distinct_keys, static_cast<std::int64_t>(seen.size()));
  EXPECT_EQ(r.trace.evaluator_calls, calls + extra);
  EXPECT_EQ(counting.calls(), calls + extra);
  EXPECT_LT(calls, 60 * 14);
}

TEST_F(DriverTest, DisablingTableKeepsResultAndCostsMore) {
  SearchConfig config = Config(50, 13);
  CountingEvaluator with(s2_), without(s2_);
  const SearchResult a = RunCmanas(config, with);
  config.use_af_table = false;
  const SearchResult b = RunCmanas(config, without);
  EXPECT_EQ(a.genotype, b.genotype);
  EXPECT_EQ(a.trace.final_fitness, b.trace.final_fitness);
  for (std::size_t g = 0; g < a.trace.records.size(); ++g) {
    ASSERT_EQ(a.trace.records[g].keys, b.trace.records[g].keys);
    ASSERT_EQ(a.trace.records[g].fitnesses, b.trace.records[g].fitnesses);
    ASSERT_EQ(b.trace.records[g].evaluator_calls, 14);
    ASSERT_EQ(b.trace.records[g].cache_hits, 0);
  }
  EXPECT_GT(without.calls(), with.calls());
  EXPECT_GE(without.calls(), 50 * 14);
}

TEST_F(DriverTest, EvaluatorErrorsCarryGeneration) {
  const TabularBenchmark empty(SearchSpaceSpec::S2(), {});
  try {
    RunCmanas(Config(3, 1), empty);
    FAIL() << "expected MissingEntryError";
  } catch (const MissingEntryError& e) {
    EXPECT_NE(std::string(e.what()).find("generation 0"), std::string::npos);
  }
  SearchConfig config = Config(3, 1);
  config.workers = 4;
  EXPECT_THROW(RunCmanas(config, empty), MissingEntryError);
}

TEST_F(DriverTest, RejectsBadConfigs) {
  EXPECT_THROW(RunCmanas(Config(3, 1, SearchMode::kRandom), s2_), ConfigError);
  EXPECT_THROW(RunRandom(Config(3, 1), s2_), ConfigError);
  EXPECT_THROW(RunCmanas(Config(-1, 1), s2_), ConfigError);
  SearchConfig config = Config(3, 1);
  config.workers = 0;
  EXPECT_THROW(RunCmanas(config, s2_), ConfigError);
  config = Config(3, 1);
  config.sigma0 = 0;
  EXPECT_THROW(RunCmanas(config, s2_), ConfigError);
  EXPECT_EQ(ParseSearchMode("random"), SearchMode::kRandom);
  EXPECT_THROW(ParseSearchMode("grid"), ConfigError);
}

TEST_F(DriverTest, TraceRoundTripsThroughJsonLines) {
  SearchConfig config = Config(15, 21);
  config.snapshot_mean = true;
  config.snapshot_full_cov = true;
  const Trace trace = RunCmanas(config, s2_).trace;
  const std::string text = TraceToJsonLines(trace);
  std::istringstream in(text);
  const Trace parsed = ParseTrace(in);
  EXPECT_EQ(TraceToJsonLines(parsed), text);
  EXPECT_EQ(parsed.records.size(), 15u);
  EXPECT_EQ(parsed.space, SearchSpaceSpec::S2());
  EXPECT_EQ(parsed.final_key, trace.final_key);
  ASSERT_TRUE(parsed.records[3].distribution.has_value());
  EXPECT_TRUE(parsed.records[3].distribution->contains("cov"));
  // Header, records, footer.
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 17);

  std::istringstream truncated(text.substr(0, text.find('\n') + 1));
  EXPECT_THROW(ParseTrace(truncated), Error);
}

TEST_F(DriverTest, TimingIsOptIn) {
  SearchConfig config = Config(3, 2);
  EXPECT_FALSE(RunCmanas(config, s2_).trace.records[0].wall_seconds.has_value());
  config.record_timing = true;
  EXPECT_TRUE(RunCmanas(config, s2_).trace.records[0].wall_seconds.has_value());
}

}  // namespace
}  // namespace cmanas
