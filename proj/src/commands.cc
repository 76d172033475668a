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

#include "cmanas/commands.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cmanas/analysis.h"
#include "cmanas/brute_force.h"
#include "cmanas/errors.h"
#include "cmanas/space_json.h"

namespace cmanas::cli {

namespace {

bool StartsWith(const std::string& text, std::string_view prefix) {
  return text.compare(0, prefix.size(), prefix) == 0;
}

void RequireWritable(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw ConfigError("output directory '" + parent.string() + "' does not exist");
  }
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw EvaluatorError("cannot write '" + path + "'");
  file << text;
  if (!file) throw EvaluatorError("failed writing '" + path + "'");
}

// Maps library exceptions onto exit codes with a one-line diagnostic.
template <typename Body>
int Guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "cmanas: " << e.what() << "\n";
    return kExitConfig;
  } catch (const EnumerationCapError& e) {
    err << "cmanas: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "cmanas: " << e.what() << "\n";
    return kExitEvaluator;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "cmanas: " << e.what() << "\n";
    return kExitEvaluator;
  }
}

}  // namespace

SearchSpaceSpec ResolveSpace(const std::string& selector) {
  if (selector == "s1") return SearchSpaceSpec::S1();
  if (selector == "s2") return SearchSpaceSpec::S2();
  if (StartsWith(selector, "custom:")) return LoadSpaceFile(selector.substr(7));
  throw ConfigError("space must be s1, s2 or custom:<path>, got '" + selector + "'");
}

std::unique_ptr<FitnessEvaluator> ResolveEvaluator(
    const std::string& selector, const std::optional<SearchSpaceSpec>& space) {
  if (StartsWith(selector, "tabular:")) {
    const std::string path = selector.substr(8);
    if (!std::filesystem::exists(path)) {
      throw ConfigError("benchmark file '" + path + "' does not exist");
    }
    auto evaluator = OpenBenchmarkFile(path);
    if (space && !(evaluator->space() == *space)) {
      throw ConfigError("benchmark space does not match --space");
    }
    return evaluator;
  }
  if (StartsWith(selector, "synthetic:")) {
    if (!space) throw ConfigError("synthetic evaluators need --space");
    const std::string rest = selector.substr(10);
    const std::size_t colon = rest.find(':');
    const std::string seed_text = rest.substr(0, colon);
    double beta = 0.3;
    std::uint64_t seed = 0;
    try {
      std::size_t used = 0;
      seed = std::stoull(seed_text, &used);
      if (used != seed_text.size() || seed_text.empty() || seed_text[0] == '-') {
        throw std::invalid_argument(seed_text);
      }
      if (colon != std::string::npos) {
        const std::string beta_text = rest.substr(colon + 1);
        beta = std::stod(beta_text, &used);
        if (used != beta_text.size()) throw std::invalid_argument(beta_text);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("malformed evaluator selector '" + selector + "'");
    }
    return std::make_unique<SyntheticBenchmark>(*space, seed, beta);
  }
  throw ConfigError("evaluator must be tabular:<path> or synthetic:<seed>[:beta], got '" +
                    selector + "'");
}

int CmdSearch(const SearchArgs& args, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    std::optional<SearchSpaceSpec> space;
    if (args.space) space.emplace(ResolveSpace(*args.space));
    const auto evaluator = ResolveEvaluator(args.evaluator, space);
    RequireWritable(args.out);

    SearchConfig config;
    config.generations = args.generations;
    config.mode = ParseSearchMode(args.mode);
    config.seed = args.seed;
    config.sigma0 = args.sigma0;
    config.population = args.population;
    config.snapshot_mean = args.snapshot_mean || args.snapshot_cov;
    config.snapshot_full_cov = args.snapshot_cov;
    config.workers = args.workers;
    config.use_af_table = !args.no_af_table;
    config.record_timing = args.timing;

    const SearchResult result = RunSearch(config, *evaluator);
    WriteTraceFile(result.trace, args.out);
    const Trace& trace = result.trace;
    const nlohmann::json summary = {
        {"final_key", trace.final_key},
        {"final_fitness", trace.final_fitness},
        {"mode", SearchModeName(config.mode)},
        {"generations", config.generations},
        {"n_pop", trace.n_pop},
        {"total_samples", trace.total_samples},
        {"evaluator_calls", trace.evaluator_calls},
        {"distinct_keys", trace.distinct_keys},
        {"best_sampled_key",
         trace.records.empty() ? "" : trace.records.back().best_key},
        {"best_sampled_fitness",
         trace.records.empty() ? 0.0 : trace.records.back().best_fitness},
        {"trace", args.out}};
    out << summary.dump() << "\n";
    return kExitOk;
  });
}

int CmdGenBench(const GenBenchArgs& args, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    const SearchSpaceSpec space = ResolveSpace(args.space);
    RequireWritable(args.out);
    const SyntheticBenchmark bench(space, args.seed, args.beta);
    const nlohmann::json meta = {
        {"generator", "synthetic"}, {"seed", args.seed}, {"beta", args.beta}};
    std::int64_t entries = 0;
    if (args.materialize) {
      const TabularBenchmark table = Materialize(bench, meta, args.cap);
      SaveBenchmark(table, args.out);
      entries = static_cast<std::int64_t>(table.entries().size());
    } else {
      WriteText(args.out, LazySyntheticToString(bench));
    }
    out << nlohmann::json{{"out", args.out},
                          {"materialized", args.materialize},
                          {"entries", entries},
                          {"evaluator", bench.Descriptor()}}
               .dump()
        << "\n";
    return kExitOk;
  });
}

int CmdBrute(const BruteArgs& args, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    std::optional<SearchSpaceSpec> space;
    if (args.space) space.emplace(ResolveSpace(*args.space));
    const auto evaluator = ResolveEvaluator(args.evaluator, space);
    if (args.ranking) RequireWritable(*args.ranking);
    const BruteForceResult result = BruteForceBest(
        *evaluator, evaluator->space(), args.ranking.has_value(), args.cap);
    if (args.ranking) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& entry : result.ranking) {
        rows.push_back({entry.key, entry.fitness});
      }
      WriteText(*args.ranking,
                nlohmann::json{{"columns", {"key", "fitness"}}, {"rows", rows}}.dump() +
                    "\n");
    }
    out << nlohmann::json{{"best_key", result.best_key},
                          {"best_fitness", result.best_fitness},
                          {"enumerated", result.enumerated}}
               .dump()
        << "\n";
    return kExitOk;
  });
}

int CmdPlotData(const PlotDataArgs& args, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    if (args.out) RequireWritable(*args.out);
    if (!std::filesystem::exists(args.trace)) {
      throw ConfigError("trace file '" + args.trace + "' does not exist");
    }
    PlotData data;
    if (args.which == "unique" || args.which == "mean" ||
        args.which == "opfreq" || args.which == "cache") {
      const Trace trace = ReadTraceFile(args.trace);
      if (args.which == "unique") data = UniquePerGeneration(trace);
      if (args.which == "mean") data = MeanProgression(trace);
      if (args.which == "opfreq") data = TopKOpFrequency(trace, args.k);
      if (args.which == "cache") data = CacheStats(trace);
    } else {
      throw ConfigError("--which must be unique, mean, opfreq or cache");
    }
    const std::string text = PlotDataToJson(data).dump() + "\n";
    if (args.out) {
      WriteText(*args.out, text);
    } else {
      out << text;
    }
    return kExitOk;
  });
}

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariance-adaptation architecture search over cell-based spaces"};
  app.require_subcommand(1);

  SearchArgs search;
  std::string space_flag;
  auto* search_cmd = app.add_subcommand("search", "run a search and write a trace");
  search_cmd->add_option("--space", space_flag, "s1 | s2 | custom:<path>");
  search_cmd->add_option("--evaluator", search.evaluator,
                         "tabular:<path> | synthetic:<seed>[:beta]")
      ->required();
  search_cmd->add_option("--mode", search.mode, "cmaes | random")
      ->check(CLI::IsMember({"cmaes", "random"}));
  search_cmd->add_option("--generations", search.generations)
      ->check(CLI::NonNegativeNumber);
  search_cmd->add_option("--seed", search.seed)->required();
  search_cmd->add_option("--out", search.out, "trace path")->required();
  search_cmd->add_option("--sigma0", search.sigma0)->check(CLI::PositiveNumber);
  search_cmd->add_option("--population", search.population, "0 = default");
  search_cmd->add_flag("--snapshot-mean", search.snapshot_mean);
  search_cmd->add_flag("--snapshot-cov", search.snapshot_cov);
  search_cmd->add_option("--workers", search.workers)->check(CLI::PositiveNumber);
  search_cmd->add_flag("--no-af-table", search.no_af_table);
  search_cmd->add_flag("--timing", search.timing);

  GenBenchArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-bench", "write a synthetic benchmark");
  gen_cmd->add_option("--space", gen.space)->required();
  gen_cmd->add_option("--seed", gen.seed)->required();
  gen_cmd->add_option("--beta", gen.beta)->check(CLI::NonNegativeNumber);
  gen_cmd->add_flag("--materialize", gen.materialize);
  gen_cmd->add_option("--out", gen.out)->required();
  gen_cmd->add_option("--cap", gen.cap);

  BruteArgs brute;
  std::string brute_space;
  std::string ranking;
  auto* brute_cmd = app.add_subcommand("brute", "exhaustively find the optimum");
  brute_cmd->add_option("--space", brute_space);
  brute_cmd->add_option("--evaluator", brute.evaluator)->required();
  brute_cmd->add_option("--cap", brute.cap);
  brute_cmd->add_option("--ranking", ranking, "write the full ranking here");

  PlotDataArgs plot;
  std::string plot_out;
  auto* plot_cmd = app.add_subcommand("plot-data", "export analysis tables");
  plot_cmd->add_option("--trace", plot.trace)->required();
  plot_cmd->add_option("--which", plot.which)
      ->required()
      ->check(CLI::IsMember({"unique", "mean", "opfreq", "cache"}));
  plot_cmd->add_option("--k", plot.k)->check(CLI::PositiveNumber);
  plot_cmd->add_option("--out", plot_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "cmanas: " << e.what() << "\n";
    return kExitConfig;
  }

  if (search_cmd->parsed()) {
    if (!space_flag.empty()) search.space = space_flag;
    return CmdSearch(search, out, err);
  }
  if (gen_cmd->parsed()) return CmdGenBench(gen, out, err);
  if (brute_cmd->parsed()) {
    if (!brute_space.empty()) brute.space = brute_space;
    if (!ranking.empty()) brute.ranking = ranking;
    return CmdBrute(brute, out, err);
  }
  if (!plot_out.empty()) plot.out = plot_out;
  return CmdPlotData(plot, out, err);
}

}  // namespace cmanas::cli
