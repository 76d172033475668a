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

#include "cmanas/search_space.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <utility>

#include "cmanas/errors.h"

namespace cmanas {

namespace {

constexpr std::string_view kReservedChars = "|[]();:,";

std::vector<Edge> AllPairsEdges(int node_count) {
  std::vector<Edge> edges;
  for (int target = 1; target < node_count; ++target) {
    for (int source = 0; source < target; ++source) {
      edges.push_back({source, target});
    }
  }
  return edges;
}

// Two cell inputs, four intermediate nodes, one output node.
CellSpec DartsCell(std::string name) {
  CellSpec cell;
  cell.name = std::move(name);
  cell.node_count = 7;
  for (int target = 2; target < 6; ++target) {
    for (int source = 0; source < target; ++source) {
      cell.edges.push_back({source, target});
    }
  }
  cell.mapping = CellMapping::kTopTwoInputs;
  cell.intermediate_nodes = {2, 3, 4, 5};
  return cell;
}

void ValidateCell(const CellSpec& cell, const OperationSet& ops) {
  if (cell.name.empty() ||
      cell.name.find_first_of(kReservedChars) != std::string::npos) {
    throw ConfigError("cell name '" + cell.name + "' is empty or reserved");
  }
  if (cell.node_count < 2) {
    throw ConfigError("cell '" + cell.name + "' needs at least two nodes");
  }
  if (cell.edges.empty()) {
    throw ConfigError("cell '" + cell.name + "' has no edges");
  }
  for (std::size_t i = 0; i < cell.edges.size(); ++i) {
    const Edge& e = cell.edges[i];
    if (e.source < 0 || e.target >= cell.node_count || e.source >= e.target) {
      throw ConfigError("cell '" + cell.name + "': edge (" +
                        std::to_string(e.source) + "," +
                        std::to_string(e.target) + ") is not a forward edge");
    }
    if (i > 0) {
      const Edge& prev = cell.edges[i - 1];
      if (std::pair(prev.target, prev.source) >= std::pair(e.target, e.source)) {
        throw ConfigError("cell '" + cell.name +
                          "': edges must be sorted by (target, source) "
                          "without duplicates");
      }
    }
  }
  if (cell.mapping == CellMapping::kPerEdge) {
    if (!cell.intermediate_nodes.empty()) {
      throw ConfigError("cell '" + cell.name +
                        "': per-edge cells have no intermediate nodes");
    }
    return;
  }
  std::vector<int> targets;
  for (const Edge& e : cell.edges) {
    if (targets.empty() || targets.back() != e.target) targets.push_back(e.target);
  }
  if (targets != cell.intermediate_nodes) {
    throw ConfigError("cell '" + cell.name +
                      "': intermediate nodes must be the edge targets");
  }
  for (int node : targets) {
    const auto incoming = std::count_if(
        cell.edges.begin(), cell.edges.end(),
        [node](const Edge& e) { return e.target == node; });
    if (incoming < 2) {
      throw ConfigError("cell '" + cell.name + "': node " +
                        std::to_string(node) + " has fewer than two inputs");
    }
  }
  if (ops.size() - (ops.zero_index() ? 1 : 0) < 1) {
    throw ConfigError("top-two cells need at least one non-zero operation");
  }
}

// Index of the largest entry among allowed columns; first wins on ties.
int ArgMax(const RowMatrix& weights, int row, const OperationSet& ops,
           bool skip_zero) {
  int best = -1;
  for (int op = 0; op < ops.size(); ++op) {
    if (skip_zero && ops.is_zero(op)) continue;
    if (best < 0 || weights(row, op) > weights(row, best)) best = op;
  }
  return best;
}

std::vector<std::string_view> Split(std::string_view text, char delim) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(delim, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

int ParseOp(std::string_view token, const OperationSet& ops) {
  const auto index = ops.IndexOf(token);
  if (!index) {
    throw UnknownOperationError("unknown operation '" + std::string(token) + "'");
  }
  return *index;
}

int ParseInt(std::string_view token) {
  if (token.empty() || token.size() > 9 ||
      !std::all_of(token.begin(), token.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    throw InvalidKeyError("expected a node index, got '" + std::string(token) + "'");
  }
  return std::stoi(std::string(token));
}

std::vector<int> ParsePerEdgeBody(std::string_view body, const CellSpec& cell,
                                  const OperationSet& ops) {
  const auto tokens = Split(body, '|');
  if (tokens.size() != cell.edges.size()) {
    throw InvalidKeyError("cell '" + cell.name + "' expects " +
                          std::to_string(cell.edges.size()) + " operations");
  }
  std::vector<int> decisions;
  decisions.reserve(tokens.size());
  for (auto token : tokens) decisions.push_back(ParseOp(token, ops));
  return decisions;
}

std::vector<int> ParseTopTwoBody(std::string_view body, const CellSpec& cell,
                                 const OperationSet& ops) {
  std::vector<int> decisions(cell.edges.size(), kDroppedEdge);
  const auto node_parts = Split(body, ';');
  if (node_parts.size() != cell.intermediate_nodes.size()) {
    throw InvalidKeyError("cell '" + cell.name + "': wrong number of nodes");
  }
  for (std::size_t n = 0; n < node_parts.size(); ++n) {
    std::string_view part = node_parts[n];
    const std::size_t colon = part.find(':');
    if (colon == std::string_view::npos ||
        ParseInt(part.substr(0, colon)) != cell.intermediate_nodes[n]) {
      throw InvalidKeyError("cell '" + cell.name + "': bad node header in '" +
                            std::string(part) + "'");
    }
    part.remove_prefix(colon + 1);
    int previous_input = -1;
    for (int k = 0; k < 2; ++k) {
      if (part.empty() || part.front() != '(') {
        throw InvalidKeyError("expected '(' in '" + std::string(body) + "'");
      }
      const std::size_t close = part.find(')');
      if (close == std::string_view::npos) {
        throw InvalidKeyError("unterminated pair in '" + std::string(body) + "'");
      }
      const std::string_view pair = part.substr(1, close - 1);
      part.remove_prefix(close + 1);
      const std::size_t comma = pair.find(',');
      if (comma == std::string_view::npos) {
        throw InvalidKeyError("malformed pair '" + std::string(pair) + "'");
      }
      const int input = ParseInt(pair.substr(0, comma));
      const int op = ParseOp(pair.substr(comma + 1), ops);
      if (input <= previous_input) {
        throw InvalidKeyError("pairs must be sorted by distinct input node");
      }
      previous_input = input;
      const int node = cell.intermediate_nodes[n];
      const auto it = std::find(cell.edges.begin(), cell.edges.end(),
                                Edge{input, node});
      if (it == cell.edges.end()) {
        throw InvalidKeyError("no edge " + std::to_string(input) + "->" +
                              std::to_string(node));
      }
      if (ops.is_zero(op)) {
        throw InvalidKeyError("kept edges cannot carry the zero operation");
      }
      decisions[it - cell.edges.begin()] = op;
    }
    if (!part.empty()) {
      throw InvalidKeyError("trailing text after node " +
                            std::to_string(cell.intermediate_nodes[n]));
    }
  }
  return decisions;
}

bool UsesBareKey(const SearchSpaceSpec& space) {
  return space.cells().size() == 1 &&
         space.cells()[0].mapping == CellMapping::kPerEdge;
}

}  // namespace

std::string_view SpaceKindName(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::kS1:
      return "S1";
    case SpaceKind::kS2:
      return "S2";
    case SpaceKind::kCustom:
      return "Custom";
  }
  return "Custom";
}

OperationSet::OperationSet(std::vector<std::string> names,
                           std::optional<int> zero_index)
    : names_(std::move(names)), zero_index_(zero_index) {
  if (names_.empty()) throw ConfigError("operation set is empty");
  std::set<std::string_view> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw ConfigError("operation names must be non-empty");
    if (name.find_first_of(kReservedChars) != std::string::npos ||
        std::any_of(name.begin(), name.end(),
                    [](unsigned char c) { return std::isspace(c); })) {
      throw ConfigError("operation name '" + name +
                        "' contains a reserved character");
    }
    if (!seen.insert(name).second) {
      throw ConfigError("duplicate operation name '" + name + "'");
    }
  }
  if (zero_index_ && (*zero_index_ < 0 || *zero_index_ >= size())) {
    throw ConfigError("zero operation index out of range");
  }
}

std::optional<int> OperationSet::IndexOf(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<int>(it - names_.begin());
}

SearchSpaceSpec::SearchSpaceSpec(SpaceKind kind, std::vector<CellSpec> cells,
                                 OperationSet ops)
    : kind_(kind), cells_(std::move(cells)), ops_(std::move(ops)) {
  if (cells_.empty()) throw ConfigError("search space has no cells");
  std::set<std::string_view> names;
  for (const auto& cell : cells_) {
    ValidateCell(cell, ops_);
    if (!names.insert(cell.name).second) {
      throw ConfigError("duplicate cell name '" + cell.name + "'");
    }
    edge_offsets_.push_back(total_edges_);
    total_edges_ += static_cast<int>(cell.edges.size());
  }
  switch (kind_) {
    case SpaceKind::kS1: {
      const CellSpec reference = DartsCell("normal");
      if (cells_.size() != 2 || ops_.size() != 8) {
        throw ConfigError("S1 needs 2 cells and 8 operations");
      }
      for (const auto& cell : cells_) {
        if (cell.edges != reference.edges || cell.node_count != 7 ||
            cell.mapping != CellMapping::kTopTwoInputs) {
          throw ConfigError("S1 cells must be 7-node, 14-edge top-two cells");
        }
      }
      break;
    }
    case SpaceKind::kS2:
      if (cells_.size() != 1 || ops_.size() != 5 ||
          cells_[0].edges != AllPairsEdges(4) ||
          cells_[0].mapping != CellMapping::kPerEdge) {
        throw ConfigError("S2 needs one 4-node, 6-edge per-edge cell and 5 operations");
      }
      break;
    case SpaceKind::kCustom:
      break;
  }
}

SearchSpaceSpec SearchSpaceSpec::S1() {
  OperationSet ops({"none", "max_pool_3x3", "avg_pool_3x3", "skip_connect",
                    "sep_conv_3x3", "sep_conv_5x5", "dil_conv_3x3",
                    "dil_conv_5x5"},
                   0);
  return SearchSpaceSpec(SpaceKind::kS1,
                         {DartsCell("normal"), DartsCell("reduce")},
                         std::move(ops));
}

SearchSpaceSpec SearchSpaceSpec::S2() {
  OperationSet ops({"none", "skip_connect", "nor_conv_1x1", "nor_conv_3x3",
                    "avg_pool_3x3"},
                   0);
  CellSpec cell;
  cell.name = "cell";
  cell.node_count = 4;
  cell.edges = AllPairsEdges(4);
  return SearchSpaceSpec(SpaceKind::kS2, {std::move(cell)}, std::move(ops));
}

int Dimension(const SearchSpaceSpec& space) {
  return space.total_edges() * space.ops().size();
}

RowMatrix SoftmaxRows(const ArchParam& alpha, const SearchSpaceSpec& space) {
  const int rows = space.total_edges();
  const int cols = space.ops().size();
  if (alpha.size() != Dimension(space)) {
    throw ConfigError("alpha has length " + std::to_string(alpha.size()) +
                      ", space dimension is " +
                      std::to_string(Dimension(space)));
  }
  RowMatrix weights =
      Eigen::Map<const RowMatrix>(alpha.data(), rows, cols);
  for (int r = 0; r < rows; ++r) {
    auto row = weights.row(r);
    row.array() = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
  return weights;
}

Genotype MapToGenotype(const ArchParam& alpha, const SearchSpaceSpec& space) {
  const RowMatrix weights = SoftmaxRows(alpha, space);
  const OperationSet& ops = space.ops();
  Genotype genotype;
  genotype.cells.reserve(space.cells().size());
  for (std::size_t c = 0; c < space.cells().size(); ++c) {
    const CellSpec& cell = space.cells()[c];
    const int offset = space.edge_offset(static_cast<int>(c));
    const int edge_count = static_cast<int>(cell.edges.size());
    std::vector<int> decisions(edge_count, kDroppedEdge);
    if (cell.mapping == CellMapping::kPerEdge) {
      for (int e = 0; e < edge_count; ++e) {
        decisions[e] = ArgMax(weights, offset + e, ops, /*skip_zero=*/false);
      }
    } else {
      for (int node : cell.intermediate_nodes) {
        std::vector<std::pair<double, int>> candidates;
        for (int e = 0; e < edge_count; ++e) {
          if (cell.edges[e].target != node) continue;
          const int op = ArgMax(weights, offset + e, ops, /*skip_zero=*/true);
          candidates.emplace_back(weights(offset + e, op), e);
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const auto& a, const auto& b) {
                           return a.first > b.first;
                         });
        for (int k = 0; k < 2; ++k) {
          const int e = candidates[k].second;
          decisions[e] = ArgMax(weights, offset + e, ops, /*skip_zero=*/true);
        }
      }
    }
    genotype.cells.push_back(std::move(decisions));
  }
  return genotype;
}

void ValidateGenotype(const Genotype& genotype, const SearchSpaceSpec& space) {
  if (genotype.cells.size() != space.cells().size()) {
    throw ConfigError("genotype has the wrong number of cells");
  }
  const OperationSet& ops = space.ops();
  for (std::size_t c = 0; c < space.cells().size(); ++c) {
    const CellSpec& cell = space.cells()[c];
    const auto& decisions = genotype.cells[c];
    if (decisions.size() != cell.edges.size()) {
      throw ConfigError("genotype cell '" + cell.name + "' has wrong edge count");
    }
    for (int op : decisions) {
      if (op == kDroppedEdge && cell.mapping == CellMapping::kTopTwoInputs) continue;
      if (op < 0 || op >= ops.size()) {
        throw ConfigError("genotype operation index out of range");
      }
      if (cell.mapping == CellMapping::kTopTwoInputs && ops.is_zero(op)) {
        throw ConfigError("kept edges cannot carry the zero operation");
      }
    }
    if (cell.mapping == CellMapping::kTopTwoInputs) {
      for (int node : cell.intermediate_nodes) {
        int kept = 0;
        for (std::size_t e = 0; e < cell.edges.size(); ++e) {
          if (cell.edges[e].target == node && decisions[e] != kDroppedEdge) ++kept;
        }
        if (kept != 2) {
          throw ConfigError("node " + std::to_string(node) + " of cell '" +
                            cell.name + "' must keep exactly two inputs");
        }
      }
    }
  }
}

DiscreteArchParam Discretize(const Genotype& genotype,
                             const SearchSpaceSpec& space) {
  ValidateGenotype(genotype, space);
  const int op_count = space.ops().size();
  DiscreteArchParam one_hot = DiscreteArchParam::Zero(Dimension(space));
  for (std::size_t c = 0; c < genotype.cells.size(); ++c) {
    const int offset = space.edge_offset(static_cast<int>(c));
    for (std::size_t e = 0; e < genotype.cells[c].size(); ++e) {
      const int op = genotype.cells[c][e];
      if (op == kDroppedEdge) continue;
      one_hot[(offset + static_cast<int>(e)) * op_count + op] = 1.0;
    }
  }
  return one_hot;
}

std::string CanonicalKey(const Genotype& genotype, const SearchSpaceSpec& space) {
  ValidateGenotype(genotype, space);
  const OperationSet& ops = space.ops();
  std::string key;
  const bool bare = UsesBareKey(space);
  for (std::size_t c = 0; c < space.cells().size(); ++c) {
    const CellSpec& cell = space.cells()[c];
    const auto& decisions = genotype.cells[c];
    if (!bare) key += cell.name + "[";
    if (cell.mapping == CellMapping::kPerEdge) {
      for (std::size_t e = 0; e < decisions.size(); ++e) {
        if (e > 0) key += '|';
        key += ops.name(decisions[e]);
      }
    } else {
      // Edges are sorted by (target, source), so kept pairs come out sorted
      // by input node.
      for (std::size_t n = 0; n < cell.intermediate_nodes.size(); ++n) {
        const int node = cell.intermediate_nodes[n];
        if (n > 0) key += ';';
        key += std::to_string(node) + ":";
        for (std::size_t e = 0; e < cell.edges.size(); ++e) {
          if (cell.edges[e].target != node || decisions[e] == kDroppedEdge) continue;
          key += "(" + std::to_string(cell.edges[e].source) + "," +
                 ops.name(decisions[e]) + ")";
        }
      }
    }
    if (!bare) key += "]";
  }
  return key;
}

Genotype ParseKey(std::string_view key, const SearchSpaceSpec& space) {
  Genotype genotype;
  if (UsesBareKey(space)) {
    genotype.cells.push_back(
        ParsePerEdgeBody(key, space.cells()[0], space.ops()));
    return genotype;
  }
  std::string_view rest = key;
  for (const CellSpec& cell : space.cells()) {
    const std::string prefix = cell.name + "[";
    if (rest.substr(0, prefix.size()) != prefix) {
      throw InvalidKeyError("expected cell '" + cell.name + "' in key '" +
                            std::string(key) + "'");
    }
    rest.remove_prefix(prefix.size());
    const std::size_t close = rest.find(']');
    if (close == std::string_view::npos) {
      throw InvalidKeyError("unterminated cell in key '" + std::string(key) + "'");
    }
    const std::string_view body = rest.substr(0, close);
    rest.remove_prefix(close + 1);
    genotype.cells.push_back(cell.mapping == CellMapping::kPerEdge
                                 ? ParsePerEdgeBody(body, cell, space.ops())
                                 : ParseTopTwoBody(body, cell, space.ops()));
  }
  if (!rest.empty()) {
    throw InvalidKeyError("trailing text in key '" + std::string(key) + "'");
  }
  return genotype;
}

}  // namespace cmanas
