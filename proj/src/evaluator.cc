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
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "cmanas/brute_force.h"
#include "cmanas/errors.h"
#include "cmanas/space_json.h"

namespace cmanas {

namespace {

struct EdgeSlot {
  int op;     // kDroppedEdge when absent
  int edge;   // global index
};

std::vector<EdgeSlot> PresentEdges(const Genotype& genotype,
                                   const SearchSpaceSpec& space) {
  std::vector<EdgeSlot> slots;
  for (std::size_t c = 0; c < genotype.cells.size(); ++c) {
    const int offset = space.edge_offset(static_cast<int>(c));
    for (std::size_t e = 0; e < genotype.cells[c].size(); ++e) {
      const int op = genotype.cells[c][e];
      if (op != kDroppedEdge) slots.push_back({op, offset + static_cast<int>(e)});
    }
  }
  return slots;
}

std::string FormatDouble(double value) {
  // Shortest round-trip form, same as the JSON writer.
  return nlohmann::json(value).dump();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EvaluatorError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EvaluatorError("cannot write '" + path + "'");
  out << text;
  if (!out) throw EvaluatorError("failed writing '" + path + "'");
}

}  // namespace

SyntheticBenchmark::SyntheticBenchmark(SearchSpaceSpec space, std::uint64_t seed,
                                       double beta)
    : space_(std::move(space)),
      seed_(seed),
      beta_(beta),
      op_count_(space_.ops().size()) {
  if (!(beta_ >= 0) || !std::isfinite(beta_)) {
    throw ConfigError("synthetic beta must be finite and >= 0");
  }
  const int edges = space_.total_edges();
  std::mt19937_64 rng(seed_);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  unary_.resize(static_cast<std::size_t>(edges) * op_count_);
  for (double& u : unary_) u = uniform(rng);
  if (beta_ > 0) {
    const std::size_t pairs = static_cast<std::size_t>(edges) * (edges - 1) / 2;
    pairwise_.resize(pairs * op_count_ * op_count_);
    for (double& p : pairwise_) p = uniform(rng);
  }

  // Which ops each edge may carry, and whether it can be absent.
  std::vector<std::vector<int>> allowed(edges);
  std::vector<bool> optional_edge(edges, false);
  for (std::size_t c = 0; c < space_.cells().size(); ++c) {
    const CellSpec& cell = space_.cells()[c];
    const int offset = space_.edge_offset(static_cast<int>(c));
    for (std::size_t e = 0; e < cell.edges.size(); ++e) {
      const bool top_two = cell.mapping == CellMapping::kTopTwoInputs;
      optional_edge[offset + e] = top_two;
      for (int op = 0; op < op_count_; ++op) {
        if (top_two && space_.ops().is_zero(op)) continue;
        allowed[offset + e].push_back(op);
      }
    }
  }
  auto edge_extreme = [&](int edge, bool want_max) {
    double best = want_max ? -1.0 : 2.0;
    for (int op : allowed[edge]) {
      const double u = unary(edge, op);
      best = want_max ? std::max(best, u) : std::min(best, u);
    }
    return best;
  };

  double upper = 0;
  double lower = 0;
  for (std::size_t c = 0; c < space_.cells().size(); ++c) {
    const CellSpec& cell = space_.cells()[c];
    const int offset = space_.edge_offset(static_cast<int>(c));
    if (cell.mapping == CellMapping::kPerEdge) {
      for (std::size_t e = 0; e < cell.edges.size(); ++e) {
        upper += edge_extreme(offset + static_cast<int>(e), true);
        lower += edge_extreme(offset + static_cast<int>(e), false);
      }
      continue;
    }
    // Each node keeps exactly two inputs.
    for (int node : cell.intermediate_nodes) {
      std::vector<double> maxima;
      std::vector<double> minima;
      for (std::size_t e = 0; e < cell.edges.size(); ++e) {
        if (cell.edges[e].target != node) continue;
        maxima.push_back(edge_extreme(offset + static_cast<int>(e), true));
        minima.push_back(edge_extreme(offset + static_cast<int>(e), false));
      }
      std::sort(maxima.rbegin(), maxima.rend());
      std::sort(minima.begin(), minima.end());
      upper += maxima[0] + maxima[1];
      lower += minima[0] + minima[1];
    }
  }
  if (beta_ > 0) {
    double pair_upper = 0;
    double pair_lower = 0;
    for (int a = 0; a < edges; ++a) {
      for (int b = a + 1; b < edges; ++b) {
        double hi = 0;
        double lo = 1;
        for (int op_a : allowed[a]) {
          for (int op_b : allowed[b]) {
            const double p = pairwise(a, op_a, b, op_b);
            hi = std::max(hi, p);
            lo = std::min(lo, p);
          }
        }
        pair_upper += hi;
        // An absent edge contributes nothing.
        pair_lower += (optional_edge[a] || optional_edge[b]) ? 0.0 : lo;
      }
    }
    upper += beta_ * pair_upper;
    lower += beta_ * pair_lower;
  }
  upper_ = upper;
  lower_ = lower;
  if (!(upper_ > lower_)) {
    // Degenerate landscape (e.g. one genotype); everything scores 1.
    lower_ = upper_ - 1.0;
  }
}

std::size_t SyntheticBenchmark::PairBase(int edge_a, int edge_b) const {
  const std::size_t edges = space_.total_edges();
  const std::size_t a = edge_a;
  const std::size_t b = edge_b;
  // Row-major index of (a, b) in the strict upper triangle.
  const std::size_t pair = a * edges - a * (a + 1) / 2 + (b - a - 1);
  return pair * op_count_ * op_count_;
}

double SyntheticBenchmark::unary(int edge, int op) const {
  return unary_.at(static_cast<std::size_t>(edge) * op_count_ + op);
}

double SyntheticBenchmark::pairwise(int edge_a, int op_a, int edge_b,
                                    int op_b) const {
  if (pairwise_.empty()) return 0.0;
  if (edge_a >= edge_b) throw ConfigError("pairwise needs edge_a < edge_b");
  return pairwise_.at(PairBase(edge_a, edge_b) + op_a * op_count_ + op_b);
}

double SyntheticBenchmark::RawScore(const Genotype& genotype) const {
  ValidateGenotype(genotype, space_);
  const auto slots = PresentEdges(genotype, space_);
  double score = 0;
  for (const auto& slot : slots) score += unary(slot.edge, slot.op);
  if (!pairwise_.empty()) {
    double pair_sum = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      for (std::size_t j = i + 1; j < slots.size(); ++j) {
        pair_sum += pairwise(slots[i].edge, slots[i].op, slots[j].edge, slots[j].op);
      }
    }
    score += beta_ * pair_sum;
  }
  return score;
}

double SyntheticBenchmark::Evaluate(const Genotype& genotype) const {
  const double fitness = (RawScore(genotype) - lower_) / (upper_ - lower_);
  return std::clamp(fitness, 0.0, 1.0);
}

std::string SyntheticBenchmark::Descriptor() const {
  return "synthetic:seed=" + std::to_string(seed_) + ":beta=" + FormatDouble(beta_);
}

SyntheticBenchmark GenSynthetic(const SearchSpaceSpec& space, std::uint64_t seed,
                                double beta) {
  return SyntheticBenchmark(space, seed, beta);
}

TabularBenchmark::TabularBenchmark(SearchSpaceSpec space,
                                   std::map<std::string, double> entries,
                                   nlohmann::json meta, std::string descriptor)
    : space_(std::move(space)),
      entries_(std::move(entries)),
      meta_(std::move(meta)),
      descriptor_(std::move(descriptor)) {}

double TabularBenchmark::Evaluate(const Genotype& genotype) const {
  const std::string key = CanonicalKey(genotype, space_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw MissingEntryError("no benchmark entry for '" + key + "'");
  }
  return it->second;
}

std::string BenchmarkToString(const TabularBenchmark& bench) {
  nlohmann::json doc;
  doc["spec"] = SpaceToJson(bench.space());
  doc["entries"] = nlohmann::json::object();
  for (const auto& [key, fitness] : bench.entries()) doc["entries"][key] = fitness;
  doc["meta"] = bench.meta();
  return doc.dump(1) + "\n";
}

void SaveBenchmark(const TabularBenchmark& bench, const std::string& path) {
  WriteFile(path, BenchmarkToString(bench));
}

TabularBenchmark ParseBenchmark(const std::string& text,
                                const std::string& descriptor) {
  // Duplicate detection has to happen during parsing; the DOM keeps only the
  // last value for a repeated key. Entries live at depth 2 under "entries".
  std::string section;
  std::set<std::string> seen;
  std::string duplicate;
  auto callback = [&](int depth, nlohmann::json::parse_event_t event,
                      nlohmann::json& parsed) {
    if (event == nlohmann::json::parse_event_t::key) {
      const auto& key = parsed.get_ref<const std::string&>();
      if (depth == 1) {
        section = key;
      } else if (depth == 2 && section == "entries" && duplicate.empty() &&
                 !seen.insert(key).second) {
        duplicate = key;
      }
    }
    return true;
  };
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text, callback);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJsonError(std::string("benchmark JSON: ") + e.what());
  }
  if (!duplicate.empty()) {
    throw DuplicateKeyError("benchmark has duplicate key '" + duplicate + "'");
  }
  if (!doc.is_object() || !doc.contains("spec") || !doc.contains("entries") ||
      !doc["entries"].is_object()) {
    throw MalformedJsonError("benchmark JSON needs 'spec' and an 'entries' object");
  }
  std::optional<SearchSpaceSpec> space;
  try {
    space.emplace(SpaceFromJson(doc["spec"]));
  } catch (const ConfigError& e) {
    throw MalformedJsonError(std::string("benchmark spec: ") + e.what());
  }
  std::map<std::string, double> entries;
  for (const auto& [key, value] : doc["entries"].items()) {
    Genotype genotype;
    try {
      genotype = ParseKey(key, *space);
    } catch (const InvalidKeyError& e) {
      throw MalformedJsonError(std::string("benchmark key: ") + e.what());
    }
    if (CanonicalKey(genotype, *space) != key) {
      throw MalformedJsonError("benchmark key '" + key + "' is not canonical");
    }
    if (!value.is_number()) {
      throw MalformedJsonError("fitness for '" + key + "' is not a number");
    }
    const double fitness = value.get<double>();
    if (!std::isfinite(fitness) || fitness < 0.0 || fitness > 1.0) {
      throw FitnessOutOfRangeError("fitness for '" + key + "' is outside [0, 1]");
    }
    entries.emplace(key, fitness);
  }
  nlohmann::json meta = doc.value("meta", nlohmann::json::object());
  return TabularBenchmark(std::move(*space), std::move(entries), std::move(meta),
                          descriptor);
}

TabularBenchmark LoadBenchmark(const std::string& path) {
  return ParseBenchmark(ReadFile(path), "tabular:" + path);
}

TabularBenchmark Materialize(const FitnessEvaluator& evaluator,
                             const nlohmann::json& meta, std::uint64_t cap) {
  std::map<std::string, double> entries;
  const SearchSpaceSpec& space = evaluator.space();
  ForEachGenotype(space, cap, [&](const Genotype& genotype) {
    entries.emplace(CanonicalKey(genotype, space), evaluator.Evaluate(genotype));
  });
  return TabularBenchmark(space, std::move(entries), meta, evaluator.Descriptor());
}

std::string LazySyntheticToString(const SyntheticBenchmark& bench) {
  nlohmann::json doc;
  doc["spec"] = SpaceToJson(bench.space());
  doc["meta"] = {{"generator", "synthetic"},
                 {"seed", bench.seed()},
                 {"beta", bench.beta()}};
  return doc.dump(1) + "\n";
}

std::unique_ptr<FitnessEvaluator> OpenBenchmarkFile(const std::string& path) {
  const std::string text = ReadFile(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJsonError(std::string("benchmark JSON: ") + e.what());
  }
  if (doc.is_object() && !doc.contains("entries") && doc.contains("meta") &&
      doc["meta"].value("generator", "") == "synthetic") {
    try {
      return std::make_unique<SyntheticBenchmark>(
          SpaceFromJson(doc.at("spec")), doc["meta"].at("seed").get<std::uint64_t>(),
          doc["meta"].at("beta").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw MalformedJsonError(std::string("lazy synthetic benchmark: ") + e.what());
    } catch (const ConfigError& e) {
      throw MalformedJsonError(std::string("lazy synthetic benchmark: ") + e.what());
    }
  }
  return std::make_unique<TabularBenchmark>(ParseBenchmark(text, "tabular:" + path));
}

}  // namespace cmanas
