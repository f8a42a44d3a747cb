#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "smoothfit/dataset.hpp"
#include "smoothfit/selectors.hpp"

namespace smoothfit {

enum class Model { m1, m2 };

const char* to_string(Model m) noexcept;

/// Centering of the true components for ASE and ASE_j. `population`
/// subtracts E m_j(X_j) under the truncated design and compares fits with
/// the true intercept; `sample` subtracts the realized-sample mean.
enum class Centering { population, sample };

const char* to_string(Centering c) noexcept;

struct SimConfig {
  Model model = Model::m1;
  int n = 200;
  double rho = 0.0;
  double sigma2 = 0.01;
  /// Variance of the untruncated covariate marginals (mean 0.5).
  double cov_var = 0.5;
  int replicates = 100;
  std::uint64_t seed = 1;
  Centering centering = Centering::population;
  /// Selectors run per replicate. M1 accepts ase_oracle, pls, pl_grid,
  /// pl_coord, pl_star; M2 accepts pls1 and pl1.
  std::vector<Method> methods;
  /// 0 means SMOOTHFIT_THREADS or hardware concurrency.
  int threads = 0;
  BandwidthSearchSpec search;

  void validate() const;
  /// Default selector set for the model.
  std::vector<Method> effective_methods() const;
};

/// Per-replicate random stream derived from the master seed.
std::mt19937_64 replicate_engine(std::uint64_t seed, std::uint64_t replicate);

/// n draws of a d-variate normal (mean 0.5, variance cov_var, common
/// correlation rho) conditioned on [0, 1]^d by rejection.
Eigen::MatrixXd sample_covariates(int n, int d, double rho, std::mt19937_64& rng,
                                  double cov_var = 0.5);
Eigen::MatrixXd sample_covariates(int n, int d, double rho, std::uint64_t seed,
                                  double cov_var = 0.5);

/// E m_j(X_j), j = 1..3, under the truncated design, by Monte Carlo with
/// 10^6 accepted draws from a fixed stream. Cached per (rho, cov_var).
Eigen::VectorXd design_component_means(double rho, double cov_var);

struct GeneratedData {
  Dataset data;
  AdditiveTruth truth;
  /// Uncentered component functions.
  std::vector<std::function<double(double)>> components;
};

/// Draws one dataset. M2 keeps only the first covariate of the same
/// three-dimensional design.
GeneratedData generate(const SimConfig& config, std::mt19937_64& rng);

struct ReplicateRecord {
  bool failed = false;
  std::string failure;
  Eigen::VectorXd oracle_bandwidths;  // empty when the oracle was not run
  // One entry per method in SimConfig::effective_methods().
  std::vector<Eigen::VectorXd> bandwidths;
  std::vector<double> ase;
  std::vector<Eigen::VectorXd> ase_j;
  std::vector<int> iterations;
};

struct MethodSummary {
  Method method;
  double mean_ase = 0.0, se_ase = 0.0;
  Eigen::VectorXd mean_ase_j, se_ase_j;
  Eigen::VectorXd mean_bandwidth;
  double mean_iterations = 0.0;
  int max_iterations = 0;
  std::vector<double> sorted_ase;
  std::vector<Eigen::VectorXd> sorted_ase_j;  // per axis
  /// log(h_j) - log(h_ASE,j) per successful replicate, when the oracle ran.
  std::vector<Eigen::VectorXd> log_differences;
};

struct SimReport {
  SimConfig config;
  std::vector<Method> methods;
  std::vector<ReplicateRecord> replicates;
  std::vector<MethodSummary> summaries;
  int failed = 0;

  const MethodSummary& summary(Method m) const;
};

/// Aggregates replicate records into per-method summaries.
void summarize(SimReport& report);

SimReport run_study(const SimConfig& config);

/// Effective worker count: explicit request, else SMOOTHFIT_THREADS, else
/// hardware concurrency.
int resolve_threads(int requested);

}  // namespace smoothfit
