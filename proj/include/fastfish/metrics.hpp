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

#ifndef FASTFISH_METRICS_HPP_
#define FASTFISH_METRICS_HPP_

#include "fastfish/results.hpp"

#include <span>
#include <vector>

namespace fastfish {

struct CurvePoint {
  Index labeled_count = 0;
  double mean = 0;
  double std = 0;
};

/// Accuracy over labeled-set size, aggregated over seeds.
struct LearningCurve {
  std::vector<CurvePoint> points;
};

/// Area under the learning curve: the plain mean of the per-cycle values,
/// in the units of the input.
double auc(std::span<const double> accuracies);

/// Mean and sample standard deviation (n - 1; zero for a single seed) of test
/// accuracy across seeds at every labeled count.
LearningCurve aggregate(std::span<const CycleRecord> records);

/// Pointwise curve - baseline; standard deviations combine in quadrature.
/// Throws AlignmentError when the labeled-count grids differ.
LearningCurve diff_to_baseline(const LearningCurve& curve, const LearningCurve& baseline);

std::vector<double> means(const LearningCurve& curve);

}  // namespace fastfish

#endif  // FASTFISH_METRICS_HPP_
