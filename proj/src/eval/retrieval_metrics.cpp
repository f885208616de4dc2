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

#include "planret/eval/retrieval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "planret/error.hpp"

namespace planret::eval {

std::size_t LabeledRanking::depth() const {
  if (queries.empty()) return 0;
  std::size_t d = queries.front().retrieved.size();
  for (const auto& q : queries) d = std::min(d, q.retrieved.size());
  return d;
}

MetricsAtK metrics_at_k(const LabeledRanking& ranking, std::size_t k) {
  if (ranking.queries.empty()) throw DataError("metrics_at_k: no queries");
  if (k < 1 || k > ranking.depth()) {
    throw ConfigError("metrics_at_k: k = " + std::to_string(k) + " outside 1.." +
                      std::to_string(ranking.depth()));
  }
  // Dense relabeling over every class seen as truth or retrieval.
  std::map<int, std::size_t> slot;
  std::set<int> present;
  for (const auto& q : ranking.queries) {
    slot.emplace(q.true_class, 0);
    present.insert(q.true_class);
    for (std::size_t r = 0; r < k; ++r) slot.emplace(q.retrieved[r], 0);
  }
  std::size_t next = 0;
  for (auto& [cls, s] : slot) s = next++;
  const std::size_t c = slot.size();

  std::vector<double> confusion(c * c, 0.0);
  std::vector<double> row(c, 0.0), col(c, 0.0);
  for (const auto& q : ranking.queries) {
    const std::size_t t = slot[q.true_class];
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t p = slot[q.retrieved[r]];
      confusion[t * c + p] += 1;
      row[t] += 1;
      col[p] += 1;
    }
  }
  const double total = static_cast<double>(ranking.queries.size() * k);

  MetricsAtK m;
  for (int cls : present) {
    const std::size_t i = slot[cls];
    const double tp = confusion[i * c + i];
    const double fp = col[i] - tp;
    const double fn = row[i] - tp;
    const double tn = total - tp - fp - fn;
    m.accuracy += (tp + tn) / total;
    m.precision += tp + fp > 0 ? tp / (tp + fp) : 0.0;
    m.recall += tp / (tp + fn);
  }
  const double n = static_cast<double>(present.size());
  m.accuracy /= n;
  m.precision /= n;
  m.recall /= n;
  const double pr = m.precision + m.recall;
  m.f1 = pr > 0 ? 2 * m.precision * m.recall / pr : 0.0;
  return m;
}

double retrieval_score(std::span<const double> f, const ScoreWeighting& w) {
  double s = 0;
  for (std::size_t k = 1; k <= f.size(); ++k) {
    s += f[k - 1] * std::pow(w.base, static_cast<double>(static_cast<int>(k) + w.exponent_offset));
  }
  return s;
}

std::vector<int> predicted_labels_top1(const LabeledRanking& ranking) {
  std::vector<int> out;
  out.reserve(ranking.queries.size());
  for (const auto& q : ranking.queries) {
    if (q.retrieved.empty()) throw DataError("predicted_labels_top1: empty ranking");
    out.push_back(q.retrieved.front());
  }
  return out;
}

}  // namespace planret::eval
