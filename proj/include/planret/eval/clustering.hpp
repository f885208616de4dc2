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

// Partition agreement scores computed from a contingency table. Entropies
// are in nats.

#include <cstddef>
#include <span>
#include <vector>

namespace planret::eval {

/// counts(i, j) = number of items with true class i and predicted label j.
/// Rows and columns cover only labels that occur.
class ContingencyTable {
 public:
  static ContingencyTable from_labels(std::span<const int> truth, std::span<const int> predicted);
  /// Throws DataError on negative counts or ragged rows.
  static ContingencyTable from_counts(const std::vector<std::vector<long>>& counts);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  long count(std::size_t i, std::size_t j) const { return counts_[i * cols_ + j]; }
  long row_sum(std::size_t i) const { return row_sums_[i]; }
  long col_sum(std::size_t j) const { return col_sums_[j]; }
  long total() const { return total_; }

  ContingencyTable transposed() const;
  /// True when the table is a permutation matrix up to scaling, i.e. the two
  /// partitions are the same up to relabeling.
  bool is_bijection() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<long> counts_;
  std::vector<long> row_sums_;
  std::vector<long> col_sums_;
  long total_ = 0;
};

struct HomogeneityCompleteness {
  double homogeneity = 1;
  double completeness = 1;
  double v_measure = 1;
};

double entropy_rows(const ContingencyTable& t);
double entropy_cols(const ContingencyTable& t);
double mutual_information(const ContingencyTable& t);
/// E[MI] under the hypergeometric model with fixed marginals.
double expected_mutual_information(const ContingencyTable& t);

HomogeneityCompleteness homogeneity_completeness_v(const ContingencyTable& t);
/// Throws DataError when fewer than two items.
double adjusted_rand(const ContingencyTable& t);
/// Arithmetic-mean normalization. Throws DataError when fewer than two items.
double adjusted_mutual_info(const ContingencyTable& t);

struct ClusteringScores {
  double homogeneity = 0;
  double completeness = 0;
  double v_measure = 0;
  double adjusted_rand = 0;
  double adjusted_mutual_info = 0;
};

ClusteringScores clustering_scores(std::span<const int> truth, std::span<const int> predicted);

}  // namespace planret::eval
