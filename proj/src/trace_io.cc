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

#include <fstream>
#include <sstream>
#include <string>

#include "cmanas/driver.h"
#include "cmanas/errors.h"
#include "cmanas/space_json.h"

namespace cmanas {

namespace {

nlohmann::json ConfigToJson(const SearchConfig& c) {
  return {{"generations", c.generations},
          {"mode", SearchModeName(c.mode)},
          {"seed", c.seed},
          {"sigma0", c.sigma0},
          {"snapshot_mean", c.snapshot_mean},
          {"snapshot_full_cov", c.snapshot_full_cov},
          {"use_af_table", c.use_af_table},
          {"population", c.population},
          {"record_timing", c.record_timing}};
}

SearchConfig ConfigFromJson(const nlohmann::json& doc) {
  SearchConfig c;
  c.generations = doc.at("generations").get<int>();
  c.mode = ParseSearchMode(doc.at("mode").get<std::string>());
  c.seed = doc.at("seed").get<std::uint64_t>();
  c.sigma0 = doc.at("sigma0").get<double>();
  c.snapshot_mean = doc.at("snapshot_mean").get<bool>();
  c.snapshot_full_cov = doc.at("snapshot_full_cov").get<bool>();
  c.use_af_table = doc.at("use_af_table").get<bool>();
  c.population = doc.at("population").get<int>();
  c.record_timing = doc.at("record_timing").get<bool>();
  return c;
}

nlohmann::json RecordToJson(const GenerationRecord& r) {
  nlohmann::json doc = {{"type", "generation"},
                        {"generation", r.generation},
                        {"keys", r.keys},
                        {"fitnesses", r.fitnesses},
                        {"cache_hits", r.cache_hits},
                        {"evaluator_calls", r.evaluator_calls},
                        {"unique_new", r.unique_new},
                        {"sigma", r.sigma},
                        {"best_key", r.best_key},
                        {"best_fitness", r.best_fitness}};
  if (r.distribution) doc["distribution"] = *r.distribution;
  if (r.wall_seconds) doc["wall_seconds"] = *r.wall_seconds;
  return doc;
}

GenerationRecord RecordFromJson(const nlohmann::json& doc) {
  GenerationRecord r;
  r.generation = doc.at("generation").get<int>();
  r.keys = doc.at("keys").get<std::vector<std::string>>();
  r.fitnesses = doc.at("fitnesses").get<std::vector<double>>();
  r.cache_hits = doc.at("cache_hits").get<int>();
  r.evaluator_calls = doc.at("evaluator_calls").get<int>();
  r.unique_new = doc.at("unique_new").get<int>();
  r.sigma = doc.at("sigma").get<double>();
  r.best_key = doc.at("best_key").get<std::string>();
  r.best_fitness = doc.at("best_fitness").get<double>();
  if (doc.contains("distribution")) r.distribution = doc["distribution"];
  if (doc.contains("wall_seconds")) r.wall_seconds = doc["wall_seconds"].get<double>();
  if (r.keys.size() != r.fitnesses.size()) {
    throw MalformedJsonError("generation record keys/fitnesses length mismatch");
  }
  return r;
}

}  // namespace

std::string TraceToJsonLines(const Trace& trace) {
  std::string out;
  const nlohmann::json header = {{"type", "header"},
                                 {"config", ConfigToJson(trace.config)},
                                 {"space", SpaceToJson(trace.space)},
                                 {"evaluator", trace.evaluator},
                                 {"dimension", trace.dimension},
                                 {"n_pop", trace.n_pop}};
  out += header.dump() + "\n";
  for (const auto& record : trace.records) out += RecordToJson(record).dump() + "\n";
  nlohmann::json footer = {{"type", "footer"},
                           {"final_key", trace.final_key},
                           {"final_fitness", trace.final_fitness},
                           {"final_extra_evaluation", trace.final_extra_evaluation},
                           {"total_samples", trace.total_samples},
                           {"evaluator_calls", trace.evaluator_calls},
                           {"distinct_keys", trace.distinct_keys}};
  if (trace.final_distribution) footer["final_distribution"] = *trace.final_distribution;
  out += footer.dump() + "\n";
  return out;
}

void WriteTraceFile(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EvaluatorError("cannot write trace '" + path + "'");
  out << TraceToJsonLines(trace);
  if (!out) throw EvaluatorError("failed writing trace '" + path + "'");
}

Trace ParseTrace(std::istream& in) {
  std::vector<nlohmann::json> lines;
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      lines.push_back(nlohmann::json::parse(line));
    }
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJsonError(std::string("trace line: ") + e.what());
  }
  if (lines.size() < 2 || lines.front().value("type", "") != "header" ||
      lines.back().value("type", "") != "footer") {
    throw MalformedJsonError("trace needs a header line and a footer line");
  }
  try {
    const auto& header = lines.front();
    Trace trace{.config = ConfigFromJson(header.at("config")),
                .space = SpaceFromJson(header.at("space"))};
    trace.evaluator = header.at("evaluator").get<std::string>();
    trace.dimension = header.at("dimension").get<int>();
    trace.n_pop = header.at("n_pop").get<int>();
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
      if (lines[i].value("type", "") != "generation") {
        throw MalformedJsonError("unexpected trace line type");
      }
      trace.records.push_back(RecordFromJson(lines[i]));
    }
    const auto& footer = lines.back();
    trace.final_key = footer.at("final_key").get<std::string>();
    trace.final_fitness = footer.at("final_fitness").get<double>();
    trace.final_extra_evaluation = footer.at("final_extra_evaluation").get<bool>();
    trace.total_samples = footer.at("total_samples").get<std::int64_t>();
    trace.evaluator_calls = footer.at("evaluator_calls").get<std::int64_t>();
    trace.distinct_keys = footer.at("distinct_keys").get<std::int64_t>();
    if (footer.contains("final_distribution")) {
      trace.final_distribution = footer["final_distribution"];
    }
    return trace;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJsonError(std::string("trace: ") + e.what());
  } catch (const ConfigError& e) {
    throw MalformedJsonError(std::string("trace: ") + e.what());
  }
}

Trace ReadTraceFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EvaluatorError("cannot open trace '" + path + "'");
  return ParseTrace(in);
}

}  // namespace cmanas
