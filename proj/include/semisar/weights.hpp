#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "semisar/grid.hpp"
#include "semisar/kernels.hpp"

namespace semisar {

/// Which kernels enter the Nadaraya-Watson numerator.
///   K1S   K1(geo / h1)
///   K1ME  K2(d_m / h2)
///   K2ME  K1(geo / h1) * K2(d_m / h2)
///   K1M   K1(geo * d_m / h1)
enum class WeightVariant { K1S, K1ME, K2ME, K1M };

std::string to_string(WeightVariant v);
WeightVariant parse_variant(const std::string& name);

struct BandwidthConfig {
  WeightVariant variant = WeightVariant::K2ME;
  double h1 = 0.5;
  double h2 = 0.5;
  int k = 4;
  KernelKind kernel1 = KernelKind::TruncatedLinear;
  KernelKind kernel2 = KernelKind::TruncatedLinear;

  bool uses_h1() const noexcept { return variant != WeightVariant::K1ME; }
  bool uses_h2() const noexcept { return variant == WeightVariant::K1ME || variant == WeightVariant::K2ME; }
  void validate() const;

  friend bool operator==(const BandwidthConfig&, const BandwidthConfig&) = default;
};

struct WeightOptions {
  /// Throw EmptyNeighborhoodError instead of falling back to uniform weights
  /// over the k nearest sites when a row has no mass.
  bool strict = false;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-stochastic, zero diagonal.
struct WeightMatrix {
  RowMatrix values;
  std::vector<int> fallback_rows;
  /// Unnormalised row sums of kernel numerators (0 for fallback rows).
  Eigen::VectorXd row_mass;

  Eigen::Index rows() const noexcept { return values.rows(); }
};

struct WeightRow {
  Eigen::RowVectorXd values;
  bool fallback = false;
};

/// Numerator of the weight between two sites at geographic distance `geo`
/// whose neighbourhood medians differ by `dm`.
double pair_kernel(const BandwidthConfig& cfg, double geo, double dm) noexcept;

Eigen::VectorXd neighborhood_medians(const Eigen::MatrixXd& T);

WeightMatrix weight_matrix(const SiteSet& sites, const Eigen::MatrixXd& T, const BandwidthConfig& cfg,
                           WeightOptions opts = {});

/// Weights of a (possibly new) target site against every observed site.
/// Observed sites at the target's exact location get weight 0.
WeightRow weight_row(const Site& target, std::span<const double> target_T, const SiteSet& sites,
                     const Eigen::MatrixXd& T, const BandwidthConfig& cfg, WeightOptions opts = {});

/// Same as weight_row, with observed-site medians precomputed.
WeightRow weight_row(const Site& target, double target_median, const SiteSet& sites,
                     const Eigen::VectorXd& medians, const BandwidthConfig& cfg, WeightOptions opts = {});

}  // namespace semisar
