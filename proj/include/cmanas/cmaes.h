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

#ifndef CMANAS_CMAES_H_
#define CMANAS_CMAES_H_

#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace cmanas::cmaes {

// Strategy parameters. All rates follow the standard (tutorial) defaults;
// selection is rank based and maximizing.
struct CmaParams {
  int n = 0;
  int n_pop = 0;
  int mu = 0;
  Eigen::VectorXd weights;  // positive, descending, sum 1
  double mu_eff = 0;
  double c_sigma = 0;
  double d_sigma = 0;
  double c_c = 0;
  double c_1 = 0;
  double c_mu = 0;
  double chi_n = 0;  // approximation of E||N(0, I)||
};

// n_pop = 4 + floor(3 ln n), mu = floor(n_pop / 2).
CmaParams DefaultParams(int n);
// Same rates with an explicit population size.
CmaParams ParamsForPopulation(int n, int n_pop);
// Throws ConfigError if an invariant does not hold.
void ValidateParams(const CmaParams& params);

// C = B diag(D^2) B^T with orthonormal B.
struct EigenDecomposition {
  Eigen::MatrixXd basis;   // B
  Eigen::VectorXd scales;  // D, square roots of the (floored) eigenvalues
};

// Symmetric eigendecomposition C = B diag(D^2) B^T. Eigenvalues are floored
// at 1e-14 * max eigenvalue before the square root. Throws NumericError when
// `c` is not symmetric to within 1e-12 * max(1, |C|_inf).
EigenDecomposition EigSym(const Eigen::MatrixXd& c);

struct CmaState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double sigma = 0;
  Eigen::VectorXd p_sigma;
  Eigen::VectorXd p_c;
  EigenDecomposition eig;
  bool eig_fresh = false;
  int generation = 0;
};

// m = 0, C = I, paths zero, eig = (I, 1).
CmaState InitState(int n, double sigma0);

// x = m + sigma * B (D .* z).
Eigen::VectorXd TransformStandardNormal(const CmaState& state,
                                        const Eigen::VectorXd& z);

// Draws n_pop samples; z is filled individual by individual, coordinate by
// coordinate, from `rng`.
std::vector<Eigen::VectorXd> SamplePopulation(const CmaState& state,
                                              const CmaParams& params,
                                              std::mt19937_64& rng);

// Stable descending order. Throws NonFiniteFitnessError on NaN or inf.
std::vector<int> RankDescending(std::span<const double> fitnesses);

Eigen::VectorXd UpdateMean(const CmaParams& params,
                           std::span<const Eigen::VectorXd> ranked);

struct StepSizeUpdate {
  Eigen::VectorXd p_sigma;
  double sigma = 0;
};

StepSizeUpdate UpdateStepSize(const CmaState& state, const CmaParams& params,
                              const Eigen::VectorXd& m_old,
                              const Eigen::VectorXd& m_new);

struct CovarianceUpdate {
  Eigen::VectorXd p_c;
  Eigen::MatrixXd cov;
  bool h_sigma = true;
};

CovarianceUpdate UpdateCovariance(const CmaState& state, const CmaParams& params,
                                  std::span<const Eigen::VectorXd> ranked,
                                  const Eigen::VectorXd& m_old,
                                  const Eigen::VectorXd& m_new,
                                  const Eigen::VectorXd& p_sigma_new);

// One full generation update: rank, mean, step size, covariance, eigen
// refresh, generation + 1.
CmaState Step(const CmaState& state, const CmaParams& params,
              std::span<const Eigen::VectorXd> population,
              std::span<const double> fitnesses);

// {"generation", "sigma", "mean", "diag_c"[, "cov"]}
nlohmann::json StateSnapshot(const CmaState& state, bool full_cov);

}  // namespace cmanas::cmaes

#endif  // CMANAS_CMAES_H_
