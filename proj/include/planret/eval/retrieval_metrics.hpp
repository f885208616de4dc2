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

// Top-k retrieval metrics. At cutoff k every (query, rank <= k) pair adds one
// count to a multiclass confusion matrix indexed by (true class, retrieved
// class). Per-class one-vs-rest counts are macro-averaged over the classes
// that occur as query classes.

#include <cstddef>
#include <span>
#include <vector>

namespace planret::eval {

struct LabeledQuery {
  int true_class = 0;
  std::vector<int> retrieved;  // class ids in rank order
};

struct LabeledRanking {
  std::vector<LabeledQuery> queries;

  /// Shortest retrieved list; the deepest cutoff that can be evaluated.
  std::size_t depth() const;
};

struct MetricsAtK {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

/// Throws ConfigError unless 1 <= k <= ranking.depth(), DataError when empty.
MetricsAtK metrics_at_k(const LabeledRanking& ranking, std::size_t k);

struct ScoreWeighting {
  double base = 0.5;
  int exponent_offset = 0;  // weight of cutoff k is base^(k + offset)
};

/// Sum over k = 1..n of f[k-1] * base^(k + offset).
double retrieval_score(std::span<const double> f, const ScoreWeighting& w = {});

/// Class of each query's rank-1 neighbour.
std::vector<int> predicted_labels_top1(const LabeledRanking& ranking);

}  // namespace planret::eval
