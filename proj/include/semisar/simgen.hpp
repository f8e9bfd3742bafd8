#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semisar/estimator.hpp"
#include "semisar/grid.hpp"
#include "semisar/weights.hpp"

namespace semisar {

enum class CovKind { SphericalNugget, Spherical, Gaussian, Sinc };

std::string to_string(CovKind k);
CovKind parse_cov_kind(const std::string& name);

/// Isotropic correlation model: partial sill m1, nugget m2, range.
/// For h > 0 every model is scaled by m1 / (m1 + m2); R(0) = 1.
struct CovModel {
  CovKind kind = CovKind::Spherical;
  double m1 = 1.0;
  double m2 = 0.0;
  double range = 0.5;  // for Sinc this is theta

  /// The simulation-study parameterisations.
  static CovModel standard(CovKind kind);
};

inline constexpr std::array<CovKind, 4> kAllCovKinds = {CovKind::SphericalNugget, CovKind::Spherical,
                                                        CovKind::Gaussian, CovKind::Sinc};

double correlation(const CovModel& model, double h);

/// Sinc through the J-Bessel form: m1/(m1+m2) (2 theta/h)^{1/2} Gamma(3/2) J_{1/2}(h/theta).
double sinc_bessel_form(double m1, double m2, double theta, double h);

struct CorrelationFactor {
  Eigen::MatrixXd L;  // lower Cholesky factor of R + jitter * I
  double jitter = 0.0;
};

/// Cholesky of the site correlation matrix, escalating diagonal jitter
/// from 1e-10 up to 1e-6 when the plain factorisation fails.
CorrelationFactor factor_correlation(const SiteSet& sites, const CovModel& model);

struct CovariateMeta {
  CovKind model = CovKind::Spherical;
  double mean = 0.0;
  int partner = -1;  // 0-based column this one is correlated with
  double pair_rho = 0.0;
  double jitter = 0.0;
};

struct CovariateDraw {
  Eigen::MatrixXd X;
  std::vector<CovariateMeta> meta;
};

/// Test hooks: pin the model of every covariate or the pair correlation.
struct CovariateOverrides {
  std::optional<CovKind> model;
  std::optional<double> pair_rho;
};

/// Correlated Gaussian covariate fields with unit variance and constant
/// means c_u ~ U[0.5, 2]. Each covariate picks one of the four standard
/// models uniformly. For 1-based u even with u+1 <= p the underlying normals
/// of u+1 are rho*z_u + sqrt(1-rho^2)*z_new with rho ~ U[-1, 1]. Factors of
/// the site correlation matrices are computed once per model and reused.
class FieldSampler {
 public:
  explicit FieldSampler(const SiteSet& sites);

  CovariateDraw draw(int p, std::uint64_t seed, const CovariateOverrides& ov = {}) const;
  const CorrelationFactor& factor(CovKind kind) const;
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_ = 0;
  std::array<CorrelationFactor, 4> factors_;
};

CovariateDraw simulate_covariates(const SiteSet& sites, int p, std::uint64_t seed, const CovariateOverrides& ov = {});

/// Row-standardised geographic kernel matrix (K1S weights, h1 = bandwidth).
WeightMatrix build_V(const SiteSet& sites, double bandwidth);

/// LU of I - rho V, reusable across right-hand sides.
class SarSystem {
 public:
  SarSystem(const WeightMatrix& V, double rho);
  /// Solves with one step of iterative refinement; throws NumericalError if
  /// the max-norm residual stays large.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, double* residual = nullptr) const;
  double rho() const noexcept { return rho_; }

 private:
  RowMatrix A_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double rho_;
};

struct SarDraw {
  Eigen::VectorXd Y;
  Eigen::VectorXd beta;
  Eigen::VectorXd eps;
  double residual = 0.0;
};

/// Y = (I - rho V)^{-1} (X beta + eps), beta_j ~ N(0, beta_sd^2), eps ~ N(0, 1).
SarDraw simulate_response(const Eigen::MatrixXd& X, const WeightMatrix& V, double rho, std::uint64_t seed,
                          double beta_sd = 10.0);
SarDraw simulate_response(const Eigen::MatrixXd& X, const SarSystem& system, std::uint64_t seed, double beta_sd = 10.0);

struct SimConfig {
  Design design = Design::Regular;
  int n = 100;
  int p = 8;
  double rho = 0.0;
  double beta_sd = 10.0;
  double v_bandwidth = 0.5;
  /// Fields are simulated on a parent set of this size and the centred
  /// sub-square of n sites is extracted. 0 simulates directly on n sites.
  int parent_count = 1936;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SimulatedData {
  Observations obs;
  Eigen::VectorXd beta_true;
  Eigen::VectorXd eps;
  std::vector<CovariateMeta> covariates;
  double solve_residual = 0.0;
};

/// Caches the site layout, correlation factors and the SAR factorisation so
/// replications only pay for the random draws.
class Simulator {
 public:
  explicit Simulator(SimConfig cfg);

  SimulatedData draw(std::uint64_t replication) const;
  const SimConfig& config() const noexcept { return cfg_; }
  const SiteSet& field_sites() const noexcept { return field_sites_; }
  const SiteSet& sample_sites() const noexcept { return sample_sites_; }

 private:
  SimConfig cfg_;
  SiteSet field_sites_;
  SiteSet sample_sites_;
  std::vector<int> sample_positions_;
  FieldSampler sampler_;
  SarSystem sar_;
};

SimulatedData simulate(const SimConfig& cfg);

}  // namespace semisar
