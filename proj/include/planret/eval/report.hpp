// Copyright 2026 The planret Authors.
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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "planret/eval/clustering.hpp"
#include "planret/eval/projection.hpp"
#include "planret/eval/retrieval_metrics.hpp"

namespace planret::eval {

struct RetrievalScores {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct MetricsReport {
  std::string model;
  std::size_t queries = 0;
  ScoreWeighting weighting;
  std::vector<MetricsAtK> at_k;  // at_k[k-1]
  RetrievalScores scores;
  ClusteringScores clustering;

  /// Throws NumericError when a value is non-finite or out of its range.
  void validate() const;
};

/// Metrics at k = 1..max_k, their retrieval scores and the top-1 clustering
/// scores against the query classes.
MetricsReport build_report(const std::string& model, const LabeledRanking& ranking,
                           std::size_t max_k, const ScoreWeighting& weighting = {});

std::string report_json(const MetricsReport& report);
/// Long-format rows: model,metric,k,value. Scores and clustering rows leave k empty.
std::string metrics_csv(std::span<const MetricsReport> reports);
/// One row per model with the four retrieval scores and five clustering scores.
std::string comparison_csv(std::span<const MetricsReport> reports);
std::string projection_csv(std::span<const std::string> case_ids, std::span<const int> class_ids,
                           const Projection2d& projection);

}  // namespace planret::eval
