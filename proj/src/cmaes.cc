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

#include "cmanas/cmaes.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cmanas/errors.h"

namespace cmanas::cmaes {

CmaParams ParamsForPopulation(int n, int n_pop) {
  if (n < 1) throw ConfigError("CMA-ES dimension must be >= 1");
  if (n_pop < 2) throw ConfigError("CMA-ES population must be >= 2");
  CmaParams p;
  p.n = n;
  p.n_pop = n_pop;
  p.mu = n_pop / 2;
  p.weights.resize(p.mu);
  for (int i = 0; i < p.mu; ++i) {
    p.weights[i] = std::log(p.mu + 0.5) - std::log(i + 1.0);
  }
  p.weights /= p.weights.sum();
  p.mu_eff = 1.0 / p.weights.squaredNorm();

  const double dn = n;
  p.c_sigma = (p.mu_eff + 2) / (dn + p.mu_eff + 5);
  p.d_sigma =
      1 + 2 * std::max(0.0, std::sqrt((p.mu_eff - 1) / (dn + 1)) - 1) + p.c_sigma;
  p.c_c = (4 + p.mu_eff / dn) / (dn + 4 + 2 * p.mu_eff / dn);
  p.c_1 = 2 / ((dn + 1.3) * (dn + 1.3) + p.mu_eff);
  p.c_mu = std::min(1 - p.c_1, 2 * (p.mu_eff - 2 + 1 / p.mu_eff) /
                                   ((dn + 2) * (dn + 2) + p.mu_eff));
  p.chi_n = std::sqrt(dn) * (1 - 1 / (4 * dn) + 1 / (21 * dn * dn));
  return p;
}

CmaParams DefaultParams(int n) {
  if (n < 1) throw ConfigError("CMA-ES dimension must be >= 1");
  return ParamsForPopulation(
      n, 4 + static_cast<int>(std::floor(3 * std::log(static_cast<double>(n)))));
}

void ValidateParams(const CmaParams& p) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid CMA-ES parameters: ") + what);
  };
  require(p.n >= 1, "n >= 1");
  require(p.n_pop >= 2, "n_pop >= 2");
  require(p.mu >= 1 && p.mu <= p.n_pop, "1 <= mu <= n_pop");
  require(p.weights.size() == p.mu, "one weight per parent");
  require(std::abs(p.weights.sum() - 1) <= 1e-12, "weights sum to 1");
  for (int i = 0; i < p.mu; ++i) {
    require(p.weights[i] > 0, "weights positive");
    if (i > 0) require(p.weights[i] <= p.weights[i - 1], "weights descending");
  }
  require(p.c_1 >= 0 && p.c_mu >= 0 && p.c_1 + p.c_mu <= 1, "c_1 + c_mu <= 1");
  require(p.c_sigma > 0 && p.c_sigma < 1, "0 < c_sigma < 1");
  require(p.c_c > 0 && p.c_c < 1, "0 < c_c < 1");
  require(p.d_sigma >= 1, "d_sigma >= 1");
}

CmaState InitState(int n, double sigma0) {
  if (n < 1) throw ConfigError("CMA-ES dimension must be >= 1");
  if (!(sigma0 > 0) || !std::isfinite(sigma0)) {
    throw ConfigError("sigma0 must be positive and finite");
  }
  CmaState s;
  s.mean = Eigen::VectorXd::Zero(n);
  s.cov = Eigen::MatrixXd::Identity(n, n);
  s.sigma = sigma0;
  s.p_sigma = Eigen::VectorXd::Zero(n);
  s.p_c = Eigen::VectorXd::Zero(n);
  s.eig.basis = Eigen::MatrixXd::Identity(n, n);
  s.eig.scales = Eigen::VectorXd::Ones(n);
  s.eig_fresh = true;
  s.generation = 0;
  return s;
}

Eigen::VectorXd TransformStandardNormal(const CmaState& state,
                                        const Eigen::VectorXd& z) {
  return state.mean +
         state.sigma * (state.eig.basis * state.eig.scales.cwiseProduct(z));
}

std::vector<Eigen::VectorXd> SamplePopulation(const CmaState& state,
                                              const CmaParams& params,
                                              std::mt19937_64& rng) {
  if (!state.eig_fresh) throw NumericError("sampling from a stale eigensystem");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> population;
  population.reserve(params.n_pop);
  Eigen::VectorXd z(params.n);
  for (int i = 0; i < params.n_pop; ++i) {
    for (int j = 0; j < params.n; ++j) z[j] = normal(rng);
    population.push_back(TransformStandardNormal(state, z));
  }
  return population;
}

std::vector<int> RankDescending(std::span<const double> fitnesses) {
  for (std::size_t i = 0; i < fitnesses.size(); ++i) {
    if (!std::isfinite(fitnesses[i])) {
      throw NonFiniteFitnessError("fitness of individual " + std::to_string(i) +
                                  " is not finite");
    }
  }
  std::vector<int> order(fitnesses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return fitnesses[a] > fitnesses[b];
  });
  return order;
}

Eigen::VectorXd UpdateMean(const CmaParams& params,
                           std::span<const Eigen::VectorXd> ranked) {
  if (static_cast<int>(ranked.size()) < params.mu) {
    throw ConfigError("fewer ranked samples than parents");
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(ranked[0].size());
  for (int i = 0; i < params.mu; ++i) mean += params.weights[i] * ranked[i];
  return mean;
}

StepSizeUpdate UpdateStepSize(const CmaState& state, const CmaParams& params,
                              const Eigen::VectorXd& m_old,
                              const Eigen::VectorXd& m_new) {
  if (!state.eig_fresh) throw NumericError("step-size update needs fresh eig");
  const auto& b = state.eig.basis;
  const Eigen::VectorXd shift = (m_new - m_old) / state.sigma;
  // C^{-1/2} shift = B diag(1/D) B^T shift
  const Eigen::VectorXd whitened =
      b * (b.transpose() * shift).cwiseQuotient(state.eig.scales);
  StepSizeUpdate out;
  out.p_sigma =
      (1 - params.c_sigma) * state.p_sigma +
      std::sqrt(params.c_sigma * (2 - params.c_sigma) * params.mu_eff) * whitened;
  out.sigma = state.sigma * std::exp((params.c_sigma / params.d_sigma) *
                                     (out.p_sigma.norm() / params.chi_n - 1));
  return out;
}

CovarianceUpdate UpdateCovariance(const CmaState& state, const CmaParams& params,
                                  std::span<const Eigen::VectorXd> ranked,
                                  const Eigen::VectorXd& m_old,
                                  const Eigen::VectorXd& m_new,
                                  const Eigen::VectorXd& p_sigma_new) {
  if (static_cast<int>(ranked.size()) < params.mu) {
    throw ConfigError("fewer ranked samples than parents");
  }
  const double n = params.n;
  const double decay_correction =
      std::sqrt(1 - std::pow(1 - params.c_sigma, 2.0 * (state.generation + 1)));
  CovarianceUpdate out;
  out.h_sigma = p_sigma_new.norm() / decay_correction <
                (1.4 + 2 / (n + 1)) * params.chi_n;
  const double h = out.h_sigma ? 1.0 : 0.0;
  const double cc_norm = params.c_c * (2 - params.c_c);
  out.p_c = (1 - params.c_c) * state.p_c +
            h * std::sqrt(cc_norm * params.mu_eff) * (m_new - m_old) / state.sigma;

  Eigen::MatrixXd steps(params.n, params.mu);
  for (int i = 0; i < params.mu; ++i) {
    steps.col(i) = std::sqrt(params.weights[i]) * (ranked[i] - m_old) / state.sigma;
  }
  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(params.n, params.n);
  rank_mu.selfadjointView<Eigen::Lower>().rankUpdate(steps);
  rank_mu = rank_mu.selfadjointView<Eigen::Lower>();

  out.cov = (1 - params.c_1 - params.c_mu) * state.cov +
            params.c_1 * (out.p_c * out.p_c.transpose() + (1 - h) * cc_norm * state.cov) +
            params.c_mu * rank_mu;
  // Cancel rounding asymmetry.
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

CmaState Step(const CmaState& state, const CmaParams& params,
              std::span<const Eigen::VectorXd> population,
              std::span<const double> fitnesses) {
  if (static_cast<int>(population.size()) != params.n_pop ||
      fitnesses.size() != population.size()) {
    throw ConfigError("population and fitness counts must equal n_pop");
  }
  const std::vector<int> order = RankDescending(fitnesses);
  std::vector<Eigen::VectorXd> ranked;
  ranked.reserve(order.size());
  for (int index : order) ranked.push_back(population[index]);

  const Eigen::VectorXd m_new = UpdateMean(params, ranked);
  const StepSizeUpdate step = UpdateStepSize(state, params, state.mean, m_new);
  CovarianceUpdate cov =
      UpdateCovariance(state, params, ranked, state.mean, m_new, step.p_sigma);

  CmaState next;
  next.mean = m_new;
  next.sigma = step.sigma;
  next.p_sigma = step.p_sigma;
  next.p_c = std::move(cov.p_c);
  next.cov = std::move(cov.cov);
  next.eig = EigSym(next.cov);
  next.eig_fresh = true;
  next.generation = state.generation + 1;
  if (!(next.sigma > 0) || !std::isfinite(next.sigma)) {
    throw NumericError("step size left (0, inf)");
  }
  return next;
}

nlohmann::json StateSnapshot(const CmaState& state, bool full_cov) {
  auto to_vector = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  nlohmann::json doc = {{"generation", state.generation},
                        {"sigma", state.sigma},
                        {"mean", to_vector(state.mean)},
                        {"diag_c", to_vector(state.cov.diagonal())}};
  if (full_cov) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < state.cov.rows(); ++r) {
      rows.push_back(to_vector(state.cov.row(r).transpose()));
    }
    doc["cov"] = std::move(rows);
  }
  return doc;
}

}  // namespace cmanas::cmaes
