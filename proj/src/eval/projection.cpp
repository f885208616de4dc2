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

#include "planret/eval/projection.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "planret/error.hpp"

namespace planret::eval {

Projection2d pca_project_2d(std::span<const float> values, std::size_t rows, std::size_t dim) {
  if (rows < 3) throw DataError("pca: needs at least 3 points, got " + std::to_string(rows));
  if (dim < 2) throw DataError("pca: needs at least 2 dimensions");
  if (values.size() != rows * dim) throw ShapeError("pca: value count does not match rows x dim");

  Eigen::MatrixXd x(rows, dim);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < dim; ++j) x(i, j) = values[i * dim + j];
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(rows - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("pca: eigendecomposition failed");

  // Eigenvalues come back ascending.
  Eigen::MatrixXd axes(dim, 2);
  Projection2d out;
  for (int a = 0; a < 2; ++a) {
    const Eigen::Index col = static_cast<Eigen::Index>(dim) - 1 - a;
    Eigen::VectorXd v = eig.eigenvectors().col(col);
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < v.size(); ++j)
      if (std::abs(v(j)) > std::abs(v(best))) best = j;
    if (v(best) < 0) v = -v;
    axes.col(a) = v;
    out.variance[a] = std::max(eig.eigenvalues()(col), 0.0);
  }
  const Eigen::MatrixXd p = x * axes;
  out.coords.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) out.coords[i] = {p(i, 0), p(i, 1)};
  return out;
}

}  // namespace planret::eval
