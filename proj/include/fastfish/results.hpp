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

// Results files are line-delimited JSON: one header line followed by one
// line per cycle record.
//
//   {"type":"header","version":1,"config_hash":"...","strategy":"...","config":{...}}
//   {"type":"cycle","seed":0,"cycle":0,"labeled_count":20,"test_accuracy":0.41,
//    "acquisition_seconds":0.0012,"selected":[...],"strategy":"random"}

#ifndef FASTFISH_RESULTS_HPP_
#define FASTFISH_RESULTS_HPP_

#include "fastfish/common.hpp"

#include "json.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fastfish {

inline constexpr int kResultsVersion = 1;

struct CycleRecord {
  Index cycle = 0;
  Index labeled_count = 0;
  double test_accuracy = 0;
  /// Wall time of the selection call only.
  double acquisition_seconds = 0;
  std::vector<Index> selected;
  std::string strategy;
  std::uint64_t seed = 0;

  bool operator==(const CycleRecord&) const = default;
};

struct ResultsHeader {
  int version = kResultsVersion;
  std::string config_hash;
  std::string strategy;
  nlohmann::json config = nlohmann::json::object();
};

struct ResultsFile {
  ResultsHeader header;
  std::vector<CycleRecord> records;
};

nlohmann::json to_json(const CycleRecord& record);
CycleRecord record_from_json(const nlohmann::json& j);

std::string encode_results(const ResultsHeader& header, std::span<const CycleRecord> records);
ResultsFile decode_results(std::string_view text);

void write_results(const ResultsHeader& header, std::span<const CycleRecord> records,
                   const std::filesystem::path& path);
ResultsFile read_results(const std::filesystem::path& path);

}  // namespace fastfish

#endif  // FASTFISH_RESULTS_HPP_
