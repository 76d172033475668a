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

#include "cmanas/space_json.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <utility>
#include <vector>

#include "cmanas/errors.h"

namespace cmanas {

namespace {

SpaceKind ParseKind(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (text == "s1") return SpaceKind::kS1;
  if (text == "s2") return SpaceKind::kS2;
  if (text == "custom") return SpaceKind::kCustom;
  throw ConfigError("unknown space kind '" + text + "'");
}

}  // namespace

nlohmann::json SpaceToJson(const SearchSpaceSpec& space) {
  nlohmann::json doc;
  doc["kind"] = std::string(SpaceKindName(space.kind()));
  doc["ops"] = space.ops().names();
  const auto zero = space.ops().zero_index();
  doc["zero_op"] = zero ? nlohmann::json(space.ops().name(*zero)) : nlohmann::json();
  doc["cells"] = nlohmann::json::array();
  for (const CellSpec& cell : space.cells()) {
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : cell.edges) edges.push_back({e.source, e.target});
    doc["cells"].push_back(
        {{"name", cell.name},
         {"nodes", cell.node_count},
         {"mapping",
          cell.mapping == CellMapping::kPerEdge ? "edge" : "top2_inputs"},
         {"edges", std::move(edges)}});
  }
  return doc;
}

SearchSpaceSpec SpaceFromJson(const nlohmann::json& doc) {
  try {
    const SpaceKind kind = ParseKind(doc.at("kind").get<std::string>());
    auto names = doc.at("ops").get<std::vector<std::string>>();
    std::optional<int> zero_index;
    if (doc.contains("zero_op") && !doc["zero_op"].is_null()) {
      const auto zero_name = doc["zero_op"].get<std::string>();
      const auto it = std::find(names.begin(), names.end(), zero_name);
      if (it == names.end()) {
        throw ConfigError("zero_op '" + zero_name + "' is not in ops");
      }
      zero_index = static_cast<int>(it - names.begin());
    }
    OperationSet ops(std::move(names), zero_index);

    std::vector<CellSpec> cells;
    const auto& cell_docs = doc.at("cells");
    if (!cell_docs.is_array()) throw ConfigError("'cells' must be an array");
    for (std::size_t c = 0; c < cell_docs.size(); ++c) {
      const auto& cell_doc = cell_docs[c];
      CellSpec cell;
      if (cell_doc.contains("name")) {
        cell.name = cell_doc["name"].get<std::string>();
      } else if (kind == SpaceKind::kS1) {
        cell.name = c == 0 ? "normal" : "reduce";
      } else if (kind == SpaceKind::kS2) {
        cell.name = "cell";
      } else {
        cell.name = "cell" + std::to_string(c);
      }
      cell.node_count = cell_doc.at("nodes").get<int>();
      for (const auto& edge : cell_doc.at("edges")) {
        const auto pair = edge.get<std::vector<int>>();
        if (pair.size() != 2) throw ConfigError("edges must be [source, target]");
        cell.edges.push_back({pair[0], pair[1]});
      }
      std::string mapping =
          kind == SpaceKind::kS1 ? "top2_inputs" : "edge";
      if (cell_doc.contains("mapping")) {
        mapping = cell_doc["mapping"].get<std::string>();
      }
      if (mapping == "top2_inputs") {
        cell.mapping = CellMapping::kTopTwoInputs;
        for (const Edge& e : cell.edges) {
          if (cell.intermediate_nodes.empty() ||
              cell.intermediate_nodes.back() != e.target) {
            cell.intermediate_nodes.push_back(e.target);
          }
        }
      } else if (mapping != "edge") {
        throw ConfigError("unknown cell mapping '" + mapping + "'");
      }
      cells.push_back(std::move(cell));
    }
    return SearchSpaceSpec(kind, std::move(cells), std::move(ops));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("search space JSON: ") + e.what());
  }
}

SearchSpaceSpec LoadSpaceFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open search space file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("search space file '" + path + "': " + e.what());
  }
  return SpaceFromJson(doc);
}

}  // namespace cmanas
