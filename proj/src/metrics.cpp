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

#include "fastfish/metrics.hpp"

#include <cmath>
#include <map>
#include <numeric>

namespace fastfish {

double auc(std::span<const double> accuracies) {
  if (accuracies.empty()) throw InvalidInput("auc of an empty curve");
  return std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / static_cast<double>(accuracies.size());
}

LearningCurve aggregate(std::span<const CycleRecord> records) {
  std::map<Index, std::vector<double>> by_count;
  for (const auto& r : records) by_count[r.labeled_count].push_back(r.test_accuracy);
  LearningCurve curve;
  for (const auto& [count, values] : by_count) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    curve.points.push_back({count, mean, values.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0});
  }
  return curve;
}

LearningCurve diff_to_baseline(const LearningCurve& curve, const LearningCurve& baseline) {
  if (curve.points.size() != baseline.points.size())
    throw AlignmentError("curves have " + std::to_string(curve.points.size()) + " and " +
                         std::to_string(baseline.points.size()) + " points");
  LearningCurve out;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i];
    const auto& b = baseline.points[i];
    if (a.labeled_count != b.labeled_count)
      throw AlignmentError("labeled counts differ at point " + std::to_string(i) + ": " +
                           std::to_string(a.labeled_count) + " vs " + std::to_string(b.labeled_count));
    out.points.push_back({a.labeled_count, a.mean - b.mean, std::hypot(a.std, b.std)});
  }
  return out;
}

std::vector<double> means(const LearningCurve& curve) {
  std::vector<double> out;
  out.reserve(curve.points.size());
  for (const auto& p : curve.points) out.push_back(p.mean);
  return out;
}

}  // namespace fastfish
