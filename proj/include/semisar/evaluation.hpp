#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "semisar/estimator.hpp"
#include "semisar/selection.hpp"
#include "semisar/simgen.hpp"

namespace semisar {

enum class Method { K1S, K1ME, K2ME, K1M, OLS, SAR };

std::string to_string(Method m);
Method parse_method(const std::string& name);
bool is_kernel_method(Method m) noexcept;
WeightVariant variant_of(Method m);

struct StandardizationParams {
  double y_mean = 0.0;
  double y_sd = 1.0;
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_sd;
};

struct StandardizedSplit {
  Observations train;
  Observations test;
  StandardizationParams params;
};

/// Centre and scale Y and every covariate with training means and sample
/// standard deviations; the test set reuses the training parameters.
/// Neighbourhood vectors are built later from the standardised training responses.
StandardizedSplit standardize(const Observations& train, const Observations& test);
Observations apply_standardization(const Observations& obs, const StandardizationParams& params);

/// beta_orig_j = beta_std_j * sd_Y / sd_Xj
Eigen::VectorXd to_original_scale(const Eigen::VectorXd& beta_std, const StandardizationParams& params);

double mae_beta(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true);

struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

/// Uniform site-level split; round(train_frac * n) training sites.
Split split_sites(std::size_t n, double train_frac, std::uint64_t seed);

struct ExperimentConfig {
  SimConfig sim;
  std::vector<Method> methods = {Method::K1S, Method::K1ME, Method::K2ME, Method::K1M, Method::OLS, Method::SAR};
  int replications = 50;
  double train_frac = 0.7;
  SearchSpace search = SearchSpace::defaults(WeightVariant::K2ME);  // variant is set per method
  std::uint64_t master_seed = 1;
  WeightOptions weights;

  void validate() const;
};

struct ReplicationRecord {
  Method method = Method::OLS;
  int rep = 0;
  bool ok = true;
  double rmse = 0.0;
  double mae_beta = 0.0;
  BandwidthConfig cfg;      // kernel methods only
  double rho_hat = 0.0;     // SAR only
  Eigen::VectorXd beta_hat; // original scale
  std::string error;
};

struct MethodAggregate {
  Method method = Method::OLS;
  int count = 0;
  int failures = 0;
  double rmse_mean = 0.0, rmse_sd = 0.0, rmse_median = 0.0;
  double mae_mean = 0.0, mae_sd = 0.0, mae_median = 0.0;
};

struct ExperimentSummary {
  ExperimentConfig cfg;
  std::vector<ReplicationRecord> records;  // sorted by (method order, rep)
  std::vector<MethodAggregate> aggregates;
};

/// One replication on an already drawn dataset: split, standardise, and per
/// method select (kernel methods, CV on the training part), fit, predict the
/// test part and score.
std::vector<ReplicationRecord> run_replication(const SimulatedData& data, const ExperimentConfig& cfg, int rep);

ExperimentSummary run_experiment(const ExperimentConfig& cfg);

/// Mean, sample standard deviation and median per method over successful records.
std::vector<MethodAggregate> aggregate(const std::vector<ReplicationRecord>& records, const std::vector<Method>& methods);

}  // namespace semisar
