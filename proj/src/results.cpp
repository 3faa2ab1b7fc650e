// Copyright 2026 The fastfish Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fastfish/results.hpp"

#include <sstream>

namespace fastfish {

using nlohmann::json;

json to_json(const CycleRecord& r) {
  return json{{"type", "cycle"},
              {"seed", r.seed},
              {"cycle", r.cycle},
              {"labeled_count", r.labeled_count},
              {"test_accuracy", r.test_accuracy},
              {"acquisition_seconds", r.acquisition_seconds},
              {"selected", r.selected},
              {"strategy", r.strategy}};
}

CycleRecord record_from_json(const json& j) {
  CycleRecord r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.cycle = j.at("cycle").get<Index>();
  r.labeled_count = j.at("labeled_count").get<Index>();
  r.test_accuracy = j.at("test_accuracy").get<double>();
  r.acquisition_seconds = j.at("acquisition_seconds").get<double>();
  r.selected = j.at("selected").get<std::vector<Index>>();
  r.strategy = j.at("strategy").get<std::string>();
  return r;
}

std::string encode_results(const ResultsHeader& header, std::span<const CycleRecord> records) {
  std::string out = json{{"type", "header"},
                         {"version", header.version},
                         {"config_hash", header.config_hash},
                         {"strategy", header.strategy},
                         {"config", header.config}}
                        .dump();
  out += '\n';
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

ResultsFile decode_results(std::string_view text) {
  ResultsFile file;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = "results line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(where + ": " + e.what());
    }
    try {
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        if (have_header) throw ValidationError(where + ": second header");
        file.header.version = j.at("version").get<int>();
        if (file.header.version != kResultsVersion)
          throw ValidationError(where + ": unsupported results version " + std::to_string(file.header.version));
        file.header.config_hash = j.at("config_hash").get<std::string>();
        file.header.strategy = j.at("strategy").get<std::string>();
        file.header.config = j.at("config");
        have_header = true;
      } else if (type == "cycle") {
        if (!have_header) throw ValidationError(where + ": record before header");
        file.records.push_back(record_from_json(j));
      } else {
        throw ValidationError(where + ": unknown type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  if (!have_header) throw ValidationError("results file has no header");
  return file;
}

void write_results(const ResultsHeader& header, std::span<const CycleRecord> records,
                   const std::filesystem::path& path) {
  write_file_atomic(path, encode_results(header, records));
}

ResultsFile read_results(const std::filesystem::path& path) { return decode_results(read_file(path)); }

}  // namespace fastfish
