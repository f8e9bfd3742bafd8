#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "semisar/grid.hpp"
#include "semisar/weights.hpp"

namespace semisar {

/// Responses and covariates at a set of sites, without neighbourhood vectors.
struct Observations {
  SiteSet sites;
  Eigen::VectorXd Y;
  Eigen::MatrixXd X;
  std::vector<std::string> covariate_names;

  Eigen::Index n() const noexcept { return Y.size(); }
  Eigen::Index p() const noexcept { return X.cols(); }
  void validate() const;
  Observations subset(std::span<const int> positions) const;
};

/// Observations plus T: row i holds the responses at the k nearest
/// neighbours of site i (ascending distance).
struct SpatialDataset {
  Observations obs;
  Eigen::MatrixXd T;
  NeighborIndex neighbors;

  static SpatialDataset build(Observations obs, int k);

  const SiteSet& sites() const noexcept { return obs.sites; }
  const Eigen::VectorXd& Y() const noexcept { return obs.Y; }
  const Eigen::MatrixXd& X() const noexcept { return obs.X; }
  int k() const noexcept { return neighbors.k; }
  Eigen::Index n() const noexcept { return obs.n(); }
  Eigen::Index p() const noexcept { return obs.p(); }

  /// Verifies dimensions, finiteness and that T matches the neighbour table.
  void validate() const;
  /// Neighbourhood vector of an arbitrary location built from this dataset's responses.
  Eigen::VectorXd neighborhood_of(const Site& target) const;
};

struct PartialResiduals {
  Eigen::VectorXd y;  // Y - W Y
  Eigen::MatrixXd x;  // X - W X
};

struct BetaFit {
  Eigen::VectorXd beta;
  double cond = 0.0;
};

struct FitResult {
  Eigen::VectorXd beta_hat;
  Eigen::VectorXd r_hat;
  BandwidthConfig cfg;
  double cond = 0.0;
  std::vector<int> fallback_rows;
};

/// Condition numbers at or above this are rejected by fit_beta.
inline constexpr double kMaxCondition = 1e10;

PartialResiduals partial_residuals(const SpatialDataset& data, const WeightMatrix& W);

/// Least squares through column-pivoted Householder QR. `cond` estimates the
/// condition number of Xt'Xt as (s_max / s_min)^2, where s_max is at least
/// `reference_norm`; pass the largest raw covariate column norm so that
/// columns annihilated by the smoother register as singular.
BetaFit fit_beta(const Eigen::MatrixXd& Xt, const Eigen::VectorXd& Yt, double reference_norm = 0.0);

Eigen::VectorXd fit_r(const WeightMatrix& W, const Eigen::VectorXd& Y, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& beta_hat);

FitResult fit(const SpatialDataset& data, const BandwidthConfig& cfg, WeightOptions opts = {});

/// In-sample fitted values X beta + r.
Eigen::VectorXd fitted_values(const SpatialDataset& data, const FitResult& fr);

double predict(const Eigen::VectorXd& x0, const Site& target, const SpatialDataset& data, const FitResult& fr,
               WeightOptions opts = {});

/// Predictions at many targets; row t of X0 belongs to targets[t].
Eigen::VectorXd predict_many(const Eigen::MatrixXd& X0, const SiteSet& targets, const SpatialDataset& data,
                             const FitResult& fr, WeightOptions opts = {});

}  // namespace semisar
