#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "semisar/weights.hpp"

namespace semisar {

/// Ordinary least squares; throws IllConditionedError on rank deficiency.
Eigen::VectorXd ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y);

struct SarFit {
  double rho_hat = 0.0;
  Eigen::VectorXd beta_hat;
  double sigma2_hat = 0.0;
  double loglik = 0.0;
  bool boundary = false;   // maximiser at an end of the search interval
  bool unimodal = true;    // profile on the grid has a single peak
};

struct SarOptions {
  double lower = -0.99;
  double upper = 0.99;
  int grid_points = 199;
  double tolerance = 1e-6;
  /// Replaces the uniform grid; no golden-section refinement is done.
  std::vector<double> fixed_grid;
};

/// Eigenvalues of V. Kernel-normalised matrices are similar to a symmetric
/// matrix through D^{1/2}, which is used when every row carries kernel mass;
/// otherwise a general eigen-decomposition is done.
std::vector<std::complex<double>> weight_eigenvalues(const WeightMatrix& V);

/// Gaussian log-likelihood of Y = rho V Y + X beta + eps with beta and sigma^2
/// profiled out.
class SarProfile {
 public:
  SarProfile(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const WeightMatrix& V);

  double loglik(double rho) const;
  Eigen::VectorXd beta(double rho) const;
  double sigma2(double rho) const;

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd Y_, VY_;
  Eigen::VectorXd beta_y_, beta_vy_;
  std::vector<std::complex<double>> eig_;
};

/// Concentrated maximum likelihood: grid over rho, then golden section.
SarFit sar_ml_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const WeightMatrix& V, SarOptions opts = {});

}  // namespace semisar
