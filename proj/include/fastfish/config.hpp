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

#ifndef FASTFISH_CONFIG_HPP_
#define FASTFISH_CONFIG_HPP_

#include "fastfish/bait.hpp"
#include "fastfish/classifier.hpp"
#include "fastfish/fisher.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace fastfish {

namespace strategy {
struct Random {};
struct Margin {};
struct Badge {};
struct Typiclust {
  Index k_nn = 20;
};
struct Bait {
  FimKind fim = fim::Binary{};
  GreedyMode mode = GreedyMode::ForwardBackward;
  double lambda = 1.0;
  Index max_candidates = 0;
};
}  // namespace strategy

using StrategyKind =
    std::variant<strategy::Random, strategy::Margin, strategy::Badge, strategy::Typiclust, strategy::Bait>;

/// Short id used in results and reports: "random", "bait:topc:2", ...
std::string strategy_id(const StrategyKind& kind);

/// Mini-grammar: random | margin | badge | typiclust | bait:exact | bait:topc[:c]
/// | bait:binary | bait:diag. A bare "bait" means bait:binary.
StrategyKind parse_strategy(std::string_view text);

struct ExperimentConfig {
  std::filesystem::path train_path;
  std::filesystem::path test_path;
  StrategyKind strategy = strategy::Random{};
  Index initial_labeled = 20;
  Index acquisition_size = 10;
  Index total_budget = 200;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  TrainConfig classifier;
};

/// Throws ConfigError listing every violated constraint.
void validate(const ExperimentConfig& config);

/// Parses the nested (or dotted-key) JSON schema; relative dataset paths are
/// resolved against `base_dir`. Unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig read_config(const std::filesystem::path& path);

/// Canonical form with every default filled in.
nlohmann::json to_json(const ExperimentConfig& config);

/// 16 hex digits, FNV-1a over the canonical JSON; independent of key order.
std::string config_hash(const ExperimentConfig& config);

}  // namespace fastfish

#endif  // FASTFISH_CONFIG_HPP_
