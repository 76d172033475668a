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

#ifndef CMANAS_COMMANDS_H_
#define CMANAS_COMMANDS_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "cmanas/driver.h"
#include "cmanas/evaluator.h"
#include "cmanas/search_space.h"

namespace cmanas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitEvaluator = 2;

// "s1" | "s2" | "custom:<path>"
SearchSpaceSpec ResolveSpace(const std::string& selector);

// "tabular:<path>" | "synthetic:<seed>[:<beta>]". A tabular file carries its
// own space; `space` is required for synthetic evaluators and, when given,
// must match the tabular file's space.
std::unique_ptr<FitnessEvaluator> ResolveEvaluator(
    const std::string& selector, const std::optional<SearchSpaceSpec>& space);

struct SearchArgs {
  std::optional<std::string> space;
  std::string evaluator;
  std::string mode = "cmaes";
  int generations = 100;
  std::uint64_t seed = 0;
  std::string out;
  double sigma0 = 0.5;
  int population = 0;
  bool snapshot_mean = false;
  bool snapshot_cov = false;
  int workers = 1;
  bool no_af_table = false;
  bool timing = false;
};

struct GenBenchArgs {
  std::string space;
  std::uint64_t seed = 0;
  double beta = 0.3;
  bool materialize = false;
  std::string out;
  std::uint64_t cap = 1'000'000;
};

struct BruteArgs {
  std::optional<std::string> space;
  std::string evaluator;
  std::uint64_t cap = 1'000'000;
  std::optional<std::string> ranking;
};

struct PlotDataArgs {
  std::string trace;
  std::string which;
  int k = 20;
  std::optional<std::string> out;
};

// Each command writes structured JSON to `out` and a one-line diagnostic to
// `err` on failure. Exit codes: 0 ok, 1 configuration, 2 evaluator or file.
int CmdSearch(const SearchArgs& args, std::ostream& out, std::ostream& err);
int CmdGenBench(const GenBenchArgs& args, std::ostream& out, std::ostream& err);
int CmdBrute(const BruteArgs& args, std::ostream& out, std::ostream& err);
int CmdPlotData(const PlotDataArgs& args, std::ostream& out, std::ostream& err);

// Flag parsing and dispatch for the `cmanas` executable.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cmanas::cli

#endif  // CMANAS_COMMANDS_H_
