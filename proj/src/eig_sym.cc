// Copyright 2026 The cmanas Authors.
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

#include <algorithm>

#include <Eigen/Eigenvalues>

#include "cmanas/cmaes.h"
#include "cmanas/errors.h"

namespace cmanas::cmaes {

namespace {

constexpr double kEigenvalueFloor = 1e-14;

double InfNorm(const Eigen::MatrixXd& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

EigenDecomposition EigSym(const Eigen::MatrixXd& c) {
  const Eigen::Index n = c.rows();
  if (n == 0 || c.cols() != n) throw NumericError("EigSym needs a square matrix");
  if (!c.allFinite()) throw NumericError("EigSym input is not finite");
  const double scale = std::max(1.0, InfNorm(c));
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw NumericError("EigSym input is not symmetric");
  }

  const Eigen::MatrixXd symmetric = 0.5 * (c + c.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    throw NumericError("EigSym did not converge");
  }
  const Eigen::VectorXd& eigenvalues = solver.eigenvalues();
  const double largest = eigenvalues.maxCoeff();
  if (!(largest > 0)) throw NumericError("EigSym: matrix has no positive eigenvalue");
  EigenDecomposition result;
  result.basis = solver.eigenvectors();
  result.scales = eigenvalues.cwiseMax(kEigenvalueFloor * largest).cwiseSqrt();
  return result;
}

}  // namespace cmanas::cmaes
