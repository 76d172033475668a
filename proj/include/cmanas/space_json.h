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

#ifndef CMANAS_SPACE_JSON_H_
#define CMANAS_SPACE_JSON_H_

#include <string>

#include "json.hpp"
#include "cmanas/search_space.h"

namespace cmanas {

// {"kind": "S2", "ops": [...], "zero_op": "none" | null,
//  "cells": [{"name": "...", "nodes": N, "mapping": "edge" | "top2_inputs",
//             "edges": [[i, j], ...]}]}
// "name" and "mapping" are optional on input; mapping defaults to
// "top2_inputs" for S1 and "edge" otherwise.
nlohmann::json SpaceToJson(const SearchSpaceSpec& space);

// Throws ConfigError on schema or invariant violations.
SearchSpaceSpec SpaceFromJson(const nlohmann::json& doc);

SearchSpaceSpec LoadSpaceFile(const std::string& path);

}  // namespace cmanas

#endif  // CMANAS_SPACE_JSON_H_
