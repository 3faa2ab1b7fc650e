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

#include "fastfish/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace fastfish {

using nlohmann::json;

namespace {

json comparable_part(const json& config) {
  json out = config;
  if (out.is_object()) {
    out.erase("strategy");
    if (out.contains("al") && out["al"].is_object()) out["al"].erase("seeds");
  }
  return out;
}

struct MeanStd {
  double mean = 0, std = 0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  const double n = static_cast<double>(v.size());
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / (n - 1));
  }
  return out;
}

}  // namespace

Summary summarize(std::span<const ResultsFile> files, const std::string& baseline) {
  if (files.empty()) throw AggregationError("no results files to summarize");
  const json reference = comparable_part(files.front().header.config);
  std::map<std::string, std::vector<CycleRecord>> by_strategy;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (comparable_part(files[i].header.config) != reference)
      throw AggregationError("results file " + std::to_string(i) + " (" + files[i].header.strategy +
                             ") was produced with an incompatible configuration");
    for (const auto& r : files[i].records) by_strategy[r.strategy].push_back(r);
  }

  Summary summary;
  summary.baseline = baseline;
  for (auto& [id, records] : by_strategy) {
    StrategySummary row;
    row.strategy = id;
    std::map<std::uint64_t, std::vector<double>> per_seed;
    double seconds = 0;
    Index acquisitions = 0;
    for (const auto& r : records) {
      per_seed[r.seed].push_back(r.test_accuracy);
      if (!r.selected.empty()) {
        seconds += r.acquisition_seconds;
        ++acquisitions;
      }
    }
    std::vector<double> aucs;
    for (const auto& [seed, acc] : per_seed) aucs.push_back(100.0 * auc(acc));
    const MeanStd m = mean_std(aucs);
    row.seeds = static_cast<Index>(per_seed.size());
    row.auc = m.mean;
    row.auc_std = m.std;
    row.acquisition_seconds = acquisitions ? seconds / static_cast<double>(acquisitions) : 0.0;
    row.curve = aggregate(records);
    summary.rows.push_back(std::move(row));
  }

  const auto base = std::find_if(summary.rows.begin(), summary.rows.end(),
                                 [&](const StrategySummary& r) { return r.strategy == baseline; });
  if (base == summary.rows.end()) {
    summary.warnings.push_back("baseline '" + baseline + "' not present; difference columns left empty");
    return summary;
  }
  const StrategySummary reference_row = *base;
  for (auto& row : summary.rows) {
    row.auc_diff = row.auc - reference_row.auc;
    row.auc_diff_std = row.strategy == baseline ? 0.0 : std::hypot(row.auc_std, reference_row.auc_std);
    try {
      row.diff = diff_to_baseline(row.curve, reference_row.curve);
    } catch (const AlignmentError& e) {
      summary.warnings.push_back(row.strategy + ": " + e.what());
    }
  }
  return summary;
}

Summary summarize_files(std::span<const std::filesystem::path> paths, const std::string& baseline) {
  std::vector<ResultsFile> files;
  for (const auto& p : paths) files.push_back(read_results(p));
  return summarize(files, baseline);
}

std::string summary_table_csv(const Summary& s) {
  std::string out = "strategy,seeds,auc,auc_std,auc_diff,auc_diff_std,acquisition_seconds\n";
  for (const auto& r : s.rows) {
    out += fmt::format("{},{},{:.2f},{:.2f},{},{},{:.6f}\n", r.strategy, r.seeds, r.auc, r.auc_std,
                       r.auc_diff ? fmt::format("{:.2f}", *r.auc_diff) : "",
                       r.auc_diff_std ? fmt::format("{:.2f}", *r.auc_diff_std) : "", r.acquisition_seconds);
  }
  return out;
}

std::string plot_data_csv(const Summary& s) {
  std::string out = "strategy,labeled_count,mean,std,diff,diff_std\n";
  for (const auto& r : s.rows) {
    for (std::size_t i = 0; i < r.curve.points.size(); ++i) {
      const auto& p = r.curve.points[i];
      std::string diff, diff_std;
      if (r.diff) {
        diff = fmt::format("{:.4f}", 100.0 * r.diff->points[i].mean);
        diff_std = fmt::format("{:.4f}", 100.0 * r.diff->points[i].std);
      }
      out += fmt::format("{},{},{:.4f},{:.4f},{},{}\n", r.strategy, p.labeled_count, 100.0 * p.mean, 100.0 * p.std,
                         diff, diff_std);
    }
  }
  return out;
}

}  // namespace fastfish
