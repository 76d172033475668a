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

#include "cmanas/evaluator.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "cmanas/af_table.h"
#include "cmanas/brute_force.h"
#include "cmanas/errors.h"
#include "cmanas/space_json.h"
#include "test_util.h"

namespace cmanas {
namespace {

using ::cmanas::testing::RandomDyadicVector;
using ::cmanas::testing::RandomNormalVector;

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

Genotype RandomGenotype(const SearchSpaceSpec& space, std::mt19937_64& rng) {
  return MapToGenotype(RandomNormalVector(Dimension(space), rng, 2.0), space);
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("cmanas_evaluator_test_" + name))
      .string();
}

TEST(AFTableTest, SecondLookupIsAHit) {
  const SyntheticBenchmark bench(SearchSpaceSpec::S2(), 1, 0.3);
  CountingEvaluator counting(bench);
  AFTable table;
  const Genotype g{{{1, 2, 3, 4, 0, 1}}};
  const double first = AfLookupOrEvaluate(g, counting, table);
  const double second = AfLookupOrEvaluate(g, counting, table);
  EXPECT_EQ(first, second);
  EXPECT_EQ(counting.calls(), 1);
  EXPECT_EQ(table.hits(), 1u);
  EXPECT_EQ(table.misses(), 1u);
  EXPECT_EQ(table.lookups(), 2u);
}

TEST(AFTableTest, ShiftedAlphasShareOneEvaluation) {
  const auto s2 = SearchSpaceSpec::S2();
  const SyntheticBenchmark bench(s2, 2, 0.3);
  CountingEvaluator counting(bench);
  AFTable table;
  std::mt19937_64 rng(3);
  const ArchParam alpha = RandomDyadicVector(30, rng);
  ArchParam shifted = alpha;
  for (int r = 0; r < 6; ++r) shifted.segment(r * 5, 5).array() += 0.5 * (r + 1);
  AfLookupOrEvaluate(MapToGenotype(alpha, s2), counting, table);
  AfLookupOrEvaluate(MapToGenotype(shifted, s2), counting, table);
  EXPECT_EQ(counting.calls(), 1);
}

TEST(AFTableTest, MatchesReplayOracle) {
  const auto s2 = SearchSpaceSpec::S2();
  const SyntheticBenchmark bench(s2, 4, 0.3);
  CountingEvaluator counting(bench);
  AFTable table;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> op(0, 4);
  // A narrow op range on most edges forces repeats.
  std::vector<Genotype> sequence;
  for (int i = 0; i < 1000; ++i) {
    Genotype g{{std::vector<int>(6)}};
    for (int e = 0; e < 6; ++e) g.cells[0][e] = e < 3 ? op(rng) % 2 : op(rng);
    sequence.push_back(g);
  }
  std::vector<double> with_table;
  for (const auto& g : sequence) with_table.push_back(AfLookupOrEvaluate(g, counting, table));

  std::map<std::string, double> oracle;
  std::vector<double> without_table;
  for (const auto& g : sequence) {
    const double f = bench.Evaluate(g);
    without_table.push_back(f);
    oracle[CanonicalKey(g, s2)] = f;
  }
  EXPECT_EQ(with_table, without_table);
  EXPECT_EQ(table.size(), oracle.size());
  for (const auto& [key, f] : oracle) EXPECT_EQ(table.Peek(key), f);
  EXPECT_EQ(counting.calls(), static_cast<int>(oracle.size()));
  EXPECT_EQ(table.hits() + table.misses(), table.lookups());
  EXPECT_EQ(table.misses(), oracle.size());

  // Repeating the sequence doubles lookups and adds no misses.
  const auto misses = table.misses();
  for (const auto& g : sequence) AfLookupOrEvaluate(g, counting, table);
  EXPECT_EQ(table.lookups(), 2000u);
  EXPECT_EQ(table.misses(), misses);
}

TEST(AFTableTest, ErrorsAreNotCached) {
  const TabularBenchmark empty(SearchSpaceSpec::S2(), {});
  AFTable table;
  const Genotype g{{std::vector<int>(6, 0)}};
  EXPECT_THROW(AfLookupOrEvaluate(g, empty, table), MissingEntryError);
  EXPECT_EQ(table.size(), 0u);
  EXPECT_EQ(table.lookups(), 0u);
}

TEST(AFTableTest, JsonRoundTrip) {
  AFTable table;
  table.Commit("a", 0.5);
  table.Commit("b", 0.25);
  table.Lookup("a");
  const AFTable copy = AFTable::FromJson(table.ToJson());
  EXPECT_EQ(copy.Peek("a"), 0.5);
  EXPECT_EQ(copy.Peek("b"), 0.25);
  EXPECT_EQ(copy.hits(), 1u);
  EXPECT_EQ(copy.misses(), 2u);
}

TEST(SyntheticTest, ScoreMatchesTableOracle) {
  std::mt19937_64 rng(6);
  for (const auto& space : {SearchSpaceSpec::S1(), SearchSpaceSpec::S2()}) {
    const SyntheticBenchmark bench(space, 9, 0.3);
    for (int trial = 0; trial < 100; ++trial) {
      const Genotype g = RandomGenotype(space, rng);
      std::vector<std::pair<int, int>> present;  // (global edge, op)
      for (std::size_t c = 0; c < g.cells.size(); ++c) {
        for (std::size_t e = 0; e < g.cells[c].size(); ++e) {
          if (g.cells[c][e] != kDroppedEdge) {
            present.emplace_back(space.edge_offset(c) + e, g.cells[c][e]);
          }
        }
      }
      double raw = 0;
      for (const auto& [e, op] : present) raw += bench.unary(e, op);
      for (std::size_t i = 0; i < present.size(); ++i) {
        for (std::size_t j = i + 1; j < present.size(); ++j) {
          raw += 0.3 * bench.pairwise(present[i].first, present[i].second,
                                      present[j].first, present[j].second);
        }
      }
      ASSERT_NEAR(bench.RawScore(g), raw, 1e-12);
      const double f = bench.Evaluate(g);
      ASSERT_GE(f, 0.0);
      ASSERT_LE(f, 1.0);
      ASSERT_NEAR(f, (raw - bench.lower_bound()) /
                         (bench.upper_bound() - bench.lower_bound()),
                  1e-12);
    }
  }
}

TEST(SyntheticTest, UnaryTableIsSeededUniformStream) {
  const SyntheticBenchmark bench(SearchSpaceSpec::S2(), 42, 0.0);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int e = 0; e < 6; ++e) {
    for (int op = 0; op < 5; ++op) ASSERT_EQ(bench.unary(e, op), uniform(rng));
  }
  EXPECT_EQ(bench.pairwise(0, 0, 1, 0), 0.0);
  EXPECT_EQ(bench.Descriptor(), "synthetic:seed=42:beta=0.0");
}

TEST(SyntheticTest, SeparableOptimumScoresOne) {
  const auto s2 = SearchSpaceSpec::S2();
  const SyntheticBenchmark bench(s2, 7, 0.0);
  Genotype best{{std::vector<int>(6)}};
  Genotype worst{{std::vector<int>(6)}};
  for (int e = 0; e < 6; ++e) {
    for (int op = 0; op < 5; ++op) {
      if (bench.unary(e, op) > bench.unary(e, best.cells[0][e])) best.cells[0][e] = op;
      if (bench.unary(e, op) < bench.unary(e, worst.cells[0][e])) worst.cells[0][e] = op;
    }
  }
  EXPECT_NEAR(bench.Evaluate(best), 1.0, 1e-15);
  EXPECT_NEAR(bench.Evaluate(worst), 0.0, 1e-15);
  const BruteForceResult brute = BruteForceBest(bench, s2);
  EXPECT_EQ(brute.best, best);
}

TEST(SyntheticTest, DeterministicForSameSeed) {
  const auto s2 = SearchSpaceSpec::S2();
  const SyntheticBenchmark a(s2, 11, 0.3), b(s2, 11, 0.3), c(s2, 12, 0.3);
  bool any_difference = false;
  ForEachGenotype(s2, kDefaultEnumerationCap, [&](const Genotype& g) {
    ASSERT_EQ(a.Evaluate(g), b.Evaluate(g));
    any_difference |= a.Evaluate(g) != c.Evaluate(g);
  });
  EXPECT_TRUE(any_difference);
}

TEST(SyntheticTest, RejectsNegativeBeta) {
  EXPECT_THROW(SyntheticBenchmark(SearchSpaceSpec::S2(), 1, -0.1), ConfigError);
}

TEST(SyntheticTest, S1ScoresStayInRange) {
  const auto s1 = SearchSpaceSpec::S1();
  const SyntheticBenchmark bench(s1, 3, 0.3);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const double raw = bench.RawScore(RandomGenotype(s1, rng));
    ASSERT_GE(raw, bench.lower_bound());
    ASSERT_LE(raw, bench.upper_bound());
  }
}

TEST(BruteForceTest, EnumeratesS2) {
  const auto s2 = SearchSpaceSpec::S2();
  EXPECT_EQ(CountGenotypes(s2), 15625u);
  const SyntheticBenchmark bench(s2, 7, 0.3);
  const BruteForceResult r = BruteForceBest(bench, s2, true);
  EXPECT_EQ(r.enumerated, 15625u);
  ASSERT_EQ(r.ranking.size(), 15625u);
  EXPECT_EQ(r.ranking.front().key, r.best_key);
  EXPECT_EQ(r.best_fitness, bench.Evaluate(r.best));
  for (std::size_t i = 1; i < r.ranking.size(); ++i) {
    ASSERT_GE(r.ranking[i - 1].fitness, r.ranking[i].fitness);
  }
  EXPECT_EQ(RankOf(r.ranking, r.best_fitness), 1u);
  EXPECT_EQ(RankOf(r.ranking, -1.0), 15626u);
  EXPECT_EQ(RankOf(r.ranking, r.ranking[10].fitness), 11u);
}

TEST(BruteForceTest, InteractionOptimumBeatsSeparableChoice) {
  const auto s2 = SearchSpaceSpec::S2();
  const SyntheticBenchmark bench(s2, 7, 0.3);
  Genotype separable{{std::vector<int>(6)}};
  for (int e = 0; e < 6; ++e) {
    for (int op = 0; op < 5; ++op) {
      if (bench.unary(e, op) > bench.unary(e, separable.cells[0][e])) {
        separable.cells[0][e] = op;
      }
    }
  }
  EXPECT_GE(BruteForceBest(bench, s2).best_fitness, bench.Evaluate(separable));
}

TEST(BruteForceTest, BeatsRandomSamples) {
  const auto s2 = SearchSpaceSpec::S2();
  const SyntheticBenchmark bench(s2, 8, 0.3);
  const double best = BruteForceBest(bench, s2).best_fitness;
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> op(0, 4);
  for (int i = 0; i < 10000; ++i) {
    Genotype g{{std::vector<int>(6)}};
    for (int& o : g.cells[0]) o = op(rng);
    ASSERT_GE(best, bench.Evaluate(g));
  }
}

TEST(BruteForceTest, CountsTopTwoCells) {
  // Nodes 2 and 3 of a 4-node top-two cell with ops {z, a, b}: node 2 has one
  // input pair, node 3 has three; each kept edge takes one of 2 ops.
  CellSpec cell{.name = "c", .node_count = 4,
                .edges = {{0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}},
                .mapping = CellMapping::kTopTwoInputs,
                .intermediate_nodes = {2, 3}};
  const SearchSpaceSpec space(SpaceKind::kCustom, {cell},
                              OperationSet({"z", "a", "b"}, 0));
  EXPECT_EQ(CountGenotypes(space), 1u * 4 * 3 * 4);
  std::set<std::string> keys;
  ForEachGenotype(space, 1000, [&](const Genotype& g) {
    ValidateGenotype(g, space);
    keys.insert(CanonicalKey(g, space));
  });
  EXPECT_EQ(keys.size(), 48u);
}

TEST(BruteForceTest, RejectsS1) {
  const auto s1 = SearchSpaceSpec::S1();
  const SyntheticBenchmark bench(s1, 1, 0.3);
  EXPECT_GT(CountGenotypes(s1), 1'000'000'000'000ull);
  EXPECT_THROW(BruteForceBest(bench, s1), EnumerationCapError);
  EXPECT_THROW(BruteForceBest(SyntheticBenchmark(SearchSpaceSpec::S2(), 1, 0.3),
                              SearchSpaceSpec::S2(), false, 15624),
               EnumerationCapError);
}

TEST(TabularTest, EmptyEntriesLoadButMiss) {
  const std::string text =
      "{\"spec\": " + SpaceToJson(SearchSpaceSpec::S2()).dump() + ", \"entries\": {}}";
  const TabularBenchmark bench = ParseBenchmark(text);
  EXPECT_TRUE(bench.entries().empty());
  EXPECT_THROW(bench.Evaluate(Genotype{{std::vector<int>(6, 1)}}), MissingEntryError);
}

TEST(TabularTest, OneEntryRoundTrip) {
  const auto s2 = SearchSpaceSpec::S2();
  const TabularBenchmark bench(s2, {{"none|skip_connect|none|none|none|none", 0.625}},
                               {{"generator", "hand"}});
  const std::string path = TempPath("one.json");
  SaveBenchmark(bench, path);
  const TabularBenchmark loaded = LoadBenchmark(path);
  EXPECT_EQ(loaded.entries(), bench.entries());
  EXPECT_EQ(loaded.meta(), bench.meta());
  EXPECT_EQ(loaded.space(), s2);
  EXPECT_EQ(loaded.Evaluate(Genotype{{{0, 1, 0, 0, 0, 0}}}), 0.625);
  EXPECT_EQ(loaded.Descriptor(), "tabular:" + path);
  std::filesystem::remove(path);
}

TEST(TabularTest, FullS2RoundTripIsByteIdentical) {
  const SyntheticBenchmark synthetic(SearchSpaceSpec::S2(), 7, 0.3);
  const TabularBenchmark bench = Materialize(
      synthetic, {{"generator", "synthetic"}, {"seed", 7}, {"beta", 0.3}});
  ASSERT_EQ(bench.entries().size(), 15625u);
  const std::string text = BenchmarkToString(bench);
  const TabularBenchmark parsed = ParseBenchmark(text);
  EXPECT_EQ(parsed.entries(), bench.entries());
  EXPECT_EQ(BenchmarkToString(parsed), text);
  ForEachGenotype(SearchSpaceSpec::S2(), kDefaultEnumerationCap,
                  [&](const Genotype& g) {
                    ASSERT_EQ(parsed.Evaluate(g), synthetic.Evaluate(g));
                  });
}

class ParseErrorTest : public ::testing::Test {
 protected:
  std::string Doc(const std::string& entries) const {
    return "{\"spec\": " + SpaceToJson(SearchSpaceSpec::S2()).dump() +
           ", \"entries\": {" + entries + "}, \"meta\": {}}";
  }
  const std::string key_ = "\"none|none|none|none|none|none\"";
};

TEST_F(ParseErrorTest, Malformed) {
  EXPECT_THROW(ParseBenchmark("{\"spec\": "), MalformedJsonError);
  EXPECT_THROW(ParseBenchmark("[]"), MalformedJsonError);
  EXPECT_THROW(ParseBenchmark(Doc(key_ + ": \"high\"")), MalformedJsonError);
  EXPECT_THROW(ParseBenchmark(Doc("\"none|none\": 0.5")), MalformedJsonError);
}

TEST_F(ParseErrorTest, UnknownOperation) {
  EXPECT_THROW(ParseBenchmark(Doc("\"none|none|none|none|none|conv7x7\": 0.5")),
               UnknownOperationError);
}

TEST_F(ParseErrorTest, FitnessOutOfRange) {
  EXPECT_THROW(ParseBenchmark(Doc(key_ + ": 1.5")), FitnessOutOfRangeError);
  EXPECT_THROW(ParseBenchmark(Doc(key_ + ": -0.01")), FitnessOutOfRangeError);
}

TEST_F(ParseErrorTest, DuplicateKey) {
  EXPECT_THROW(ParseBenchmark(Doc(key_ + ": 0.5, " + key_ + ": 0.5")),
               DuplicateKeyError);
  // The same key in two different sections is not a duplicate entry.
  const std::string text =
      "{\"meta\": {\"none|none|none|none|none|none\": 1}, \"spec\": " +
      SpaceToJson(SearchSpaceSpec::S2()).dump() + ", \"entries\": {" + key_ +
      ": 0.5}}";
  EXPECT_NO_THROW(ParseBenchmark(text));
}

TEST_F(ParseErrorTest, ErrorTypesAreDistinct) {
  auto kind = [&](const std::string& text) -> std::string {
    try {
      ParseBenchmark(text);
    } catch (const DuplicateKeyError&) {
      return "duplicate";
    } catch (const FitnessOutOfRangeError&) {
      return "range";
    } catch (const UnknownOperationError&) {
      return "op";
    } catch (const MalformedJsonError&) {
      return "malformed";
    }
    return "ok";
  };
  EXPECT_EQ(kind("{"), "malformed");
  EXPECT_EQ(kind(Doc("\"a|a|a|a|a|a\": 0.5")), "op");
  EXPECT_EQ(kind(Doc(key_ + ": 2")), "range");
  EXPECT_EQ(kind(Doc(key_ + ": 0.1," + key_ + ": 0.2")), "duplicate");
  EXPECT_EQ(kind(Doc(key_ + ": 0.1")), "ok");
}

TEST(OpenBenchmarkFileTest, LazySyntheticAndMissingFile) {
  const SyntheticBenchmark bench(SearchSpaceSpec::S2(), 5, 0.25);
  const std::string path = TempPath("lazy.json");
  {
    std::ofstream out(path);
    out << LazySyntheticToString(bench);
  }
  const auto opened = OpenBenchmarkFile(path);
  EXPECT_EQ(opened->Descriptor(), bench.Descriptor());
  const Genotype g{{{4, 3, 2, 1, 0, 1}}};
  EXPECT_EQ(opened->Evaluate(g), bench.Evaluate(g));
  std::filesystem::remove(path);
  EXPECT_THROW(OpenBenchmarkFile(path), EvaluatorError);
}

}  // namespace
}  // namespace cmanas
