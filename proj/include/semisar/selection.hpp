#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "semisar/estimator.hpp"
#include "semisar/weights.hpp"

namespace semisar {

struct SearchSpace {
  std::vector<double> h1_set;
  std::vector<double> h2_set;
  std::vector<int> k_set;
  WeightVariant variant = WeightVariant::K2ME;
  KernelKind kernel1 = KernelKind::TruncatedLinear;
  KernelKind kernel2 = KernelKind::TruncatedLinear;
  int folds = 5;
  bool loo = false;

  /// h1, h2 in {0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0}, k in {4, 8, 12}, 5 folds.
  static SearchSpace defaults(WeightVariant variant);

  /// Sorts and deduplicates the candidate sets, then validates them.
  void normalize();
  void validate() const;

  /// Every distinct configuration. Bandwidths the variant ignores are pinned
  /// to the first candidate so that no configuration is scored twice.
  std::vector<BandwidthConfig> configs() const;
};

struct ScoredConfig {
  BandwidthConfig cfg;
  double cv_rmse = 0.0;  // +inf when the configuration could not be fitted
  bool feasible = true;
};

struct SelectionResult {
  BandwidthConfig best;
  double best_score = 0.0;
  std::vector<ScoredConfig> score_table;
  int ties = 0;
};

double rmse(std::span<const double> pred, std::span<const double> actual);
double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual);

/// Fold label of each site; balanced and fully determined by the seed.
std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed);

/// CV RMSE of a single configuration. V-fold: fit on the complement of each
/// fold (neighbourhoods rebuilt from training responses only) and predict the
/// held-out sites. LOO: one full-sample fit, score X beta + r_hat, whose
/// weights already exclude each site from its own smooth.
double cv_score(const Observations& data, const BandwidthConfig& cfg, int folds, bool loo, std::uint64_t seed,
                WeightOptions opts = {});

/// Grid search. Ties (within 1e-12) go to the smaller k, then h2, then h1.
SelectionResult cv_select(const Observations& data, SearchSpace space, std::uint64_t seed, WeightOptions opts = {});

}  // namespace semisar
