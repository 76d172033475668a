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

#include "cmanas/brute_force.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include "cmanas/errors.h"

namespace cmanas {

namespace {

// One independent decision of a genotype: a per-edge op choice, or the
// (input pair, op, op) choice of a top-two node.
struct Unit {
  int cell = 0;
  std::vector<int> edges;      // per-edge unit: one edge; node unit: candidates
  std::vector<int> ops;        // selectable op indices
  bool top_two = false;

  std::uint64_t choices() const {
    const std::uint64_t m = ops.size();
    if (!top_two) return m;
    const std::uint64_t k = edges.size();
    return k * (k - 1) / 2 * m * m;
  }
};

std::vector<Unit> BuildUnits(const SearchSpaceSpec& space) {
  std::vector<Unit> units;
  for (std::size_t c = 0; c < space.cells().size(); ++c) {
    const CellSpec& cell = space.cells()[c];
    const bool top_two = cell.mapping == CellMapping::kTopTwoInputs;
    std::vector<int> ops;
    for (int op = 0; op < space.ops().size(); ++op) {
      if (top_two && space.ops().is_zero(op)) continue;
      ops.push_back(op);
    }
    if (!top_two) {
      for (std::size_t e = 0; e < cell.edges.size(); ++e) {
        units.push_back({static_cast<int>(c), {static_cast<int>(e)}, ops, false});
      }
      continue;
    }
    for (int node : cell.intermediate_nodes) {
      Unit unit{static_cast<int>(c), {}, ops, true};
      for (std::size_t e = 0; e < cell.edges.size(); ++e) {
        if (cell.edges[e].target == node) unit.edges.push_back(static_cast<int>(e));
      }
      units.push_back(std::move(unit));
    }
  }
  return units;
}

void Apply(const Unit& unit, std::uint64_t choice, Genotype& genotype) {
  auto& cell = genotype.cells[unit.cell];
  const std::uint64_t m = unit.ops.size();
  if (!unit.top_two) {
    cell[unit.edges[0]] = unit.ops[choice];
    return;
  }
  for (int e : unit.edges) cell[e] = kDroppedEdge;
  const int op_b = unit.ops[choice % m];
  choice /= m;
  const int op_a = unit.ops[choice % m];
  choice /= m;
  // choice indexes the (i < j) pairs of candidate edges in lexicographic order.
  const int k = static_cast<int>(unit.edges.size());
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (choice-- == 0) {
        cell[unit.edges[i]] = op_a;
        cell[unit.edges[j]] = op_b;
        return;
      }
    }
  }
}

}  // namespace

std::uint64_t CountGenotypes(const SearchSpaceSpec& space) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 1;
  for (const Unit& unit : BuildUnits(space)) {
    const std::uint64_t c = unit.choices();
    if (c != 0 && total > kMax / c) return kMax;
    total *= c;
  }
  return total;
}

void ForEachGenotype(const SearchSpaceSpec& space, std::uint64_t cap,
                     const std::function<void(const Genotype&)>& visit) {
  const std::uint64_t total = CountGenotypes(space);
  if (total > cap) {
    throw EnumerationCapError("space has " +
                              (total == std::numeric_limits<std::uint64_t>::max()
                                   ? std::string("more than 1.8e19")
                                   : std::to_string(total)) +
                              " genotypes, cap is " + std::to_string(cap));
  }
  const std::vector<Unit> units = BuildUnits(space);
  Genotype genotype;
  for (const CellSpec& cell : space.cells()) {
    genotype.cells.emplace_back(cell.edges.size(), kDroppedEdge);
  }
  std::vector<std::uint64_t> digits(units.size(), 0);
  for (std::size_t u = 0; u < units.size(); ++u) Apply(units[u], 0, genotype);
  for (std::uint64_t visited = 0; visited < total; ++visited) {
    visit(genotype);
    // Odometer, last unit fastest.
    for (std::size_t u = units.size(); u-- > 0;) {
      if (++digits[u] < units[u].choices()) {
        Apply(units[u], digits[u], genotype);
        break;
      }
      digits[u] = 0;
      Apply(units[u], 0, genotype);
    }
  }
}

BruteForceResult BruteForceBest(const FitnessEvaluator& evaluator,
                                const SearchSpaceSpec& space, bool keep_ranking,
                                std::uint64_t cap) {
  BruteForceResult result;
  result.best_fitness = -std::numeric_limits<double>::infinity();
  ForEachGenotype(space, cap, [&](const Genotype& genotype) {
    const double fitness = evaluator.Evaluate(genotype);
    ++result.enumerated;
    if (fitness > result.best_fitness) {
      result.best_fitness = fitness;
      result.best = genotype;
    }
    if (keep_ranking) {
      result.ranking.push_back({CanonicalKey(genotype, space), fitness});
    }
  });
  if (result.enumerated == 0) throw EnumerationCapError("space is empty");
  result.best_key = CanonicalKey(result.best, space);
  std::stable_sort(result.ranking.begin(), result.ranking.end(),
                   [](const RankedGenotype& a, const RankedGenotype& b) {
                     return a.fitness > b.fitness;
                   });
  return result;
}

std::uint64_t RankOf(std::span<const RankedGenotype> ranking, double fitness) {
  // Ranking is sorted descending: count the strictly fitter prefix.
  const auto it = std::partition_point(
      ranking.begin(), ranking.end(),
      [fitness](const RankedGenotype& r) { return r.fitness > fitness; });
  return 1 + static_cast<std::uint64_t>(it - ranking.begin());
}

}  // namespace cmanas
