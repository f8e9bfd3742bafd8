#include "semisar/baselines.hpp"

#include <cmath>
#include <numbers>

#include "semisar/errors.hpp"
#include "semisar/estimator.hpp"

namespace semisar {

Eigen::VectorXd ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y) {
  return fit_beta(X, Y).beta;
}

std::vector<std::complex<double>> weight_eigenvalues(const WeightMatrix& V) {
  const auto n = V.rows();
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  const bool symmetrisable = V.fallback_rows.empty() && V.row_mass.size() == n && (V.row_mass.array() > 0.0).all();
  if (symmetrisable) {
    const Eigen::ArrayXd s = V.row_mass.array().sqrt();
    Eigen::MatrixXd S = (s.matrix().asDiagonal() * V.values * s.inverse().matrix().asDiagonal());
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition of V failed");
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(V.values), false);
    if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition of V failed");
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  }
  return out;
}

SarProfile::SarProfile(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const WeightMatrix& V)
    : X_(X), Y_(Y), VY_(V.values * Y), eig_(weight_eigenvalues(V)) {
  if (V.rows() != Y.size() || X.rows() != Y.size()) throw ValidationError("sar: dimension mismatch");
  // beta(rho) = beta_y - rho * beta_vy since OLS is linear in the response
  const auto bf = fit_beta(X, Y);
  beta_y_ = bf.beta;
  beta_vy_ = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(X).solve(VY_);
}

Eigen::VectorXd SarProfile::beta(double rho) const { return beta_y_ - rho * beta_vy_; }

double SarProfile::sigma2(double rho) const {
  const Eigen::VectorXd e = (Y_ - rho * VY_) - X_ * beta(rho);
  return e.squaredNorm() / static_cast<double>(Y_.size());
}

double SarProfile::loglik(double rho) const {
  const double n = static_cast<double>(Y_.size());
  double logdet = 0.0;
  for (const auto& lam : eig_) logdet += std::log(std::abs(1.0 - rho * lam));
  return -0.5 * n * (std::log(2.0 * std::numbers::pi) + 1.0 + std::log(sigma2(rho))) + logdet;
}

SarFit sar_ml_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const WeightMatrix& V, SarOptions opts) {
  const SarProfile prof(X, Y, V);

  std::vector<double> grid = opts.fixed_grid;
  const bool refine = grid.empty();
  if (refine) {
    if (!(opts.lower < opts.upper) || opts.grid_points < 3) throw ValidationError("sar: invalid search interval");
    for (int i = 0; i < opts.grid_points; ++i)
      grid.push_back(opts.lower + (opts.upper - opts.lower) * i / (opts.grid_points - 1));
  }
  std::vector<double> ll(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ll[i] = prof.loglik(grid[i]);
    if (ll[i] > ll[best]) best = i;
  }

  SarFit out;
  int sign_changes = 0;
  int last_sign = 0;
  for (std::size_t i = 1; i < ll.size(); ++i) {
    const double d = ll[i] - ll[i - 1];
    const int sg = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (sg != 0) {
      if (last_sign != 0 && sg != last_sign) ++sign_changes;
      last_sign = sg;
    }
  }
  out.unimodal = sign_changes <= 1;

  double rho = grid[best];
  if (refine) {
    out.boundary = best == 0 || best + 1 == grid.size();
    double a = grid[best == 0 ? 0 : best - 1];
    double b = grid[best + 1 == grid.size() ? best : best + 1];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = prof.loglik(c), fd = prof.loglik(d);
    while (b - a > opts.tolerance) {
      if (fc > fd) {
        b = d; d = c; fd = fc;
        c = b - invphi * (b - a);
        fc = prof.loglik(c);
      } else {
        a = c; c = d; fc = fd;
        d = a + invphi * (b - a);
        fd = prof.loglik(d);
      }
    }
    const double mid = 0.5 * (a + b);
    if (prof.loglik(mid) > ll[best]) rho = mid;
  }
  out.rho_hat = rho;
  out.beta_hat = prof.beta(rho);
  out.sigma2_hat = prof.sigma2(rho);
  out.loglik = prof.loglik(rho);
  return out;
}

}  // namespace semisar
