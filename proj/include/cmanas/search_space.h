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

#ifndef CMANAS_SEARCH_SPACE_H_
#define CMANAS_SEARCH_SPACE_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace cmanas {

enum class SpaceKind { kS1, kS2, kCustom };

std::string_view SpaceKindName(SpaceKind kind);

// How a cell turns softmax weights into discrete decisions.
//   kPerEdge:      every edge keeps its top operation (NAS-Bench-201 style).
//   kTopTwoInputs: every intermediate node keeps its two strongest incoming
//                  edges, strength ignoring the zero operation (DARTS style).
enum class CellMapping { kPerEdge, kTopTwoInputs };

// Ordered, named operation space. Names double as key tokens, so they may not
// contain any of the key delimiters.
class OperationSet {
 public:
  OperationSet(std::vector<std::string> names, std::optional<int> zero_index);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<int> zero_index() const { return zero_index_; }
  bool is_zero(int index) const { return zero_index_ && *zero_index_ == index; }
  std::optional<int> IndexOf(std::string_view name) const;

  bool operator==(const OperationSet&) const = default;

 private:
  std::vector<std::string> names_;
  std::optional<int> zero_index_;
};

struct Edge {
  int source = 0;
  int target = 0;
  bool operator==(const Edge&) const = default;
};

struct CellSpec {
  std::string name;
  int node_count = 0;
  // Sorted by (target, source), strictly ascending.
  std::vector<Edge> edges;
  CellMapping mapping = CellMapping::kPerEdge;
  // Nodes that select two inputs; filled for kTopTwoInputs cells only.
  std::vector<int> intermediate_nodes;

  bool operator==(const CellSpec&) const = default;
};

// Declarative description of a cell-based search space. Immutable once built;
// the constructor enforces every structural invariant.
class SearchSpaceSpec {
 public:
  SearchSpaceSpec(SpaceKind kind, std::vector<CellSpec> cells, OperationSet ops);

  // DARTS-like space: normal and reduction cells, 14 edges, 8 operations.
  static SearchSpaceSpec S1();
  // NAS-Bench-201-like space: one cell, 6 edges, 5 operations.
  static SearchSpaceSpec S2();

  SpaceKind kind() const { return kind_; }
  const std::vector<CellSpec>& cells() const { return cells_; }
  const OperationSet& ops() const { return ops_; }

  int total_edges() const { return total_edges_; }
  // Index of the first row of `cell` in the flat (edge x op) layout.
  int edge_offset(int cell) const { return edge_offsets_.at(cell); }

  bool operator==(const SearchSpaceSpec&) const = default;

 private:
  SpaceKind kind_;
  std::vector<CellSpec> cells_;
  OperationSet ops_;
  std::vector<int> edge_offsets_;
  int total_edges_ = 0;
};

// Length of alpha: sum over cells of edges x |ops|.
int Dimension(const SearchSpaceSpec& space);

// Architecture parameter alpha, laid out cell-major, then edge (canonical
// order), then operation.
using ArchParam = Eigen::VectorXd;
// One-hot image of a genotype in the same layout as ArchParam.
using DiscreteArchParam = Eigen::VectorXd;

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kDroppedEdge = -1;

// Discrete architecture. cells[c][e] is the operation chosen on edge e of
// cell c, or kDroppedEdge when a top-two cell does not keep that edge.
struct Genotype {
  std::vector<std::vector<int>> cells;
  bool operator==(const Genotype&) const = default;
};

// Per-edge softmax of alpha; one row per edge across all cells.
RowMatrix SoftmaxRows(const ArchParam& alpha, const SearchSpaceSpec& space);

Genotype MapToGenotype(const ArchParam& alpha, const SearchSpaceSpec& space);

DiscreteArchParam Discretize(const Genotype& genotype,
                             const SearchSpaceSpec& space);

// Throws ConfigError describing the first violated invariant.
void ValidateGenotype(const Genotype& genotype, const SearchSpaceSpec& space);

// Injective text form of a genotype; the AF-table and benchmark key.
//   single per-edge cell:  "op|op|...|op"
//   otherwise:             "name[...]name[...]" where a per-edge body is the
//                          "|"-joined list and a top-two body is
//                          "node:(in,op)(in,op);node:..." with pairs sorted by
//                          input node.
std::string CanonicalKey(const Genotype& genotype, const SearchSpaceSpec& space);

// Inverse of CanonicalKey. Only canonical spellings are accepted; throws
// UnknownOperationError for unknown op names and InvalidKeyError otherwise.
Genotype ParseKey(std::string_view key, const SearchSpaceSpec& space);

}  // namespace cmanas

#endif  // CMANAS_SEARCH_SPACE_H_
