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

#include "planret/eval/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "planret/error.hpp"

namespace planret::eval {
namespace {

double choose2(long n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

double marginal_entropy(std::span<const long> sums, long total) {
  double h = 0;
  const double n = static_cast<double>(total);
  for (long s : sums) {
    if (s > 0) h -= (s / n) * std::log(s / n);
  }
  return h;
}

void require_pairs(const ContingencyTable& t, const char* what) {
  if (t.total() < 2) throw DataError(std::string(what) + ": needs at least two items");
}

}  // namespace

ContingencyTable ContingencyTable::from_labels(std::span<const int> truth,
                                               std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw DataError("contingency: " + std::to_string(truth.size()) + " true labels vs " +
                    std::to_string(predicted.size()) + " predicted");
  }
  std::map<int, std::size_t> rs, cs;
  for (int v : truth) rs.emplace(v, 0);
  for (int v : predicted) cs.emplace(v, 0);
  std::size_t next = 0;
  for (auto& [v, s] : rs) s = next++;
  next = 0;
  for (auto& [v, s] : cs) s = next++;
  std::vector<std::vector<long>> counts(rs.size(), std::vector<long>(cs.size(), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) ++counts[rs[truth[i]]][cs[predicted[i]]];
  return from_counts(counts);
}

ContingencyTable ContingencyTable::from_counts(const std::vector<std::vector<long>>& counts) {
  ContingencyTable t;
  t.rows_ = counts.size();
  t.cols_ = counts.empty() ? 0 : counts.front().size();
  t.row_sums_.assign(t.rows_, 0);
  t.col_sums_.assign(t.cols_, 0);
  for (std::size_t i = 0; i < t.rows_; ++i) {
    if (counts[i].size() != t.cols_) throw DataError("contingency: ragged count rows");
    for (std::size_t j = 0; j < t.cols_; ++j) {
      const long v = counts[i][j];
      if (v < 0) throw DataError("contingency: negative count");
      t.counts_.push_back(v);
      t.row_sums_[i] += v;
      t.col_sums_[j] += v;
      t.total_ += v;
    }
  }
  return t;
}

ContingencyTable ContingencyTable::transposed() const {
  std::vector<std::vector<long>> c(cols_, std::vector<long>(rows_));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) c[j][i] = count(i, j);
  return from_counts(c);
}

bool ContingencyTable::is_bijection() const {
  std::size_t nonempty_rows = 0, nonempty_cols = 0, nonzero = 0;
  for (long s : row_sums_) nonempty_rows += s > 0;
  for (long s : col_sums_) nonempty_cols += s > 0;
  for (long v : counts_) nonzero += v > 0;
  return nonzero == nonempty_rows && nonzero == nonempty_cols;
}

double entropy_rows(const ContingencyTable& t) {
  std::vector<long> s(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) s[i] = t.row_sum(i);
  return marginal_entropy(s, t.total());
}

double entropy_cols(const ContingencyTable& t) {
  std::vector<long> s(t.cols());
  for (std::size_t j = 0; j < t.cols(); ++j) s[j] = t.col_sum(j);
  return marginal_entropy(s, t.total());
}

double mutual_information(const ContingencyTable& t) {
  const double n = static_cast<double>(t.total());
  double mi = 0;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) {
      const double nij = static_cast<double>(t.count(i, j));
      if (nij == 0) continue;
      mi += nij / n * std::log(n * nij / (static_cast<double>(t.row_sum(i)) * t.col_sum(j)));
    }
  }
  return std::max(mi, 0.0);
}

double expected_mutual_information(const ContingencyTable& t) {
  const long n = t.total();
  const double nd = static_cast<double>(n);
  const double lg_n = std::lgamma(nd + 1);
  double emi = 0;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const long a = t.row_sum(i);
    if (a == 0) continue;
    for (std::size_t j = 0; j < t.cols(); ++j) {
      const long b = t.col_sum(j);
      if (b == 0) continue;
      const double fixed = std::lgamma(a + 1.0) + std::lgamma(b + 1.0) +
                           std::lgamma(nd - a + 1) + std::lgamma(nd - b + 1) - lg_n;
      for (long k = std::max(1L, a + b - n); k <= std::min(a, b); ++k) {
        const double kd = static_cast<double>(k);
        const double log_p = fixed - std::lgamma(kd + 1) - std::lgamma(a - kd + 1) -
                             std::lgamma(b - kd + 1) - std::lgamma(nd - a - b + kd + 1);
        emi += kd / nd * std::log(nd * kd / (static_cast<double>(a) * b)) * std::exp(log_p);
      }
    }
  }
  return emi;
}

HomogeneityCompleteness homogeneity_completeness_v(const ContingencyTable& t) {
  if (t.total() < 1) throw DataError("homogeneity: empty partition");
  const double hc = entropy_rows(t);
  const double hk = entropy_cols(t);
  const double mi = mutual_information(t);
  // H(C|K) = H(C) - MI and H(K|C) = H(K) - MI.
  HomogeneityCompleteness r;
  r.homogeneity = hc > 0 ? std::clamp(mi / hc, 0.0, 1.0) : 1.0;
  r.completeness = hk > 0 ? std::clamp(mi / hk, 0.0, 1.0) : 1.0;
  const double s = r.homogeneity + r.completeness;
  r.v_measure = s > 0 ? 2 * r.homogeneity * r.completeness / s : 0.0;
  return r;
}

double adjusted_rand(const ContingencyTable& t) {
  require_pairs(t, "adjusted_rand");
  double index = 0, sum_a = 0, sum_b = 0;
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) index += choose2(t.count(i, j));
  for (std::size_t i = 0; i < t.rows(); ++i) sum_a += choose2(t.row_sum(i));
  for (std::size_t j = 0; j < t.cols(); ++j) sum_b += choose2(t.col_sum(j));
  const double expected = sum_a * sum_b / choose2(t.total());
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0) return t.is_bijection() ? 1.0 : 0.0;
  return (index - expected) / denom;
}

double adjusted_mutual_info(const ContingencyTable& t) {
  require_pairs(t, "adjusted_mutual_info");
  const double mi = mutual_information(t);
  const double emi = expected_mutual_information(t);
  const double denom = 0.5 * (entropy_rows(t) + entropy_cols(t)) - emi;
  if (std::abs(denom) < 1e-15) return 0.0;
  return (mi - emi) / denom;
}

ClusteringScores clustering_scores(std::span<const int> truth, std::span<const int> predicted) {
  const auto t = ContingencyTable::from_labels(truth, predicted);
  const auto hcv = homogeneity_completeness_v(t);
  return {hcv.homogeneity, hcv.completeness, hcv.v_measure, adjusted_rand(t),
          adjusted_mutual_info(t)};
}

}  // namespace planret::eval
