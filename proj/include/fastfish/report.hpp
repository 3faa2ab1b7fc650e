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

#ifndef FASTFISH_REPORT_HPP_
#define FASTFISH_REPORT_HPP_

#include "fastfish/metrics.hpp"
#include "fastfish/results.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fastfish {

struct StrategySummary {
  std::string strategy;
  Index seeds = 0;
  /// Mean over seeds of the per-seed AUC, in percentage points.
  double auc = 0;
  double auc_std = 0;
  /// Empty when the baseline strategy is absent.
  std::optional<double> auc_diff;
  std::optional<double> auc_diff_std;
  /// Mean wall time per acquisition (cycles that selected something).
  double acquisition_seconds = 0;
  LearningCurve curve;
  std::optional<LearningCurve> diff;
};

struct Summary {
  std::string baseline;
  std::vector<StrategySummary> rows;  // sorted by strategy id
  std::vector<std::string> warnings;
};

/// Groups records by strategy. Files must agree on dataset, AL schedule and
/// classifier settings; otherwise AggregationError.
Summary summarize(std::span<const ResultsFile> files, const std::string& baseline = "random");
Summary summarize_files(std::span<const std::filesystem::path> paths, const std::string& baseline = "random");

/// strategy,seeds,auc,auc_std,auc_diff,auc_diff_std,acquisition_seconds
std::string summary_table_csv(const Summary& summary);
/// strategy,labeled_count,mean,std,diff,diff_std (accuracies in percent)
std::string plot_data_csv(const Summary& summary);

}  // namespace fastfish

#endif  // FASTFISH_REPORT_HPP_
