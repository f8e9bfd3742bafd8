#include "semisar/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semisar/errors.hpp"

namespace semisar {

void Observations::validate() const {
  if (sites.size() != static_cast<std::size_t>(Y.size())) throw ValidationError("Y: length must equal site count");
  if (X.rows() != Y.size()) throw ValidationError("X: row count must equal site count");
  if (!Y.allFinite()) throw ValidationError("Y: non-finite entries");
  if (!X.allFinite()) throw ValidationError("X: non-finite entries");
  if (!covariate_names.empty() && covariate_names.size() != static_cast<std::size_t>(X.cols()))
    throw ValidationError("covariate_names: count must equal the number of columns of X");
}

Observations Observations::subset(std::span<const int> positions) const {
  Observations out;
  out.sites = sites.subset(positions);
  out.sites.design = sites.design;
  out.Y.resize(static_cast<Eigen::Index>(positions.size()));
  out.X.resize(static_cast<Eigen::Index>(positions.size()), X.cols());
  for (std::size_t t = 0; t < positions.size(); ++t) {
    out.Y(static_cast<Eigen::Index>(t)) = Y(positions[t]);
    out.X.row(static_cast<Eigen::Index>(t)) = X.row(positions[t]);
  }
  out.covariate_names = covariate_names;
  return out;
}

SpatialDataset SpatialDataset::build(Observations obs, int k) {
  obs.validate();
  SpatialDataset d;
  d.neighbors = knn(obs.sites, k);
  d.T.resize(obs.n(), k);
  for (Eigen::Index i = 0; i < obs.n(); ++i) {
    const auto row = d.neighbors.row(static_cast<std::size_t>(i));
    for (int j = 0; j < k; ++j) d.T(i, j) = obs.Y(row[static_cast<std::size_t>(j)]);
  }
  d.obs = std::move(obs);
  return d;
}

void SpatialDataset::validate() const {
  obs.validate();
  if (T.rows() != n() || T.cols() != k() || neighbors.rows() != static_cast<std::size_t>(n()))
    throw ValidationError("T: dimensions inconsistent with the neighbour table");
  for (Eigen::Index i = 0; i < n(); ++i) {
    const auto row = neighbors.row(static_cast<std::size_t>(i));
    for (int j = 0; j < k(); ++j)
      if (T(i, j) != obs.Y(row[static_cast<std::size_t>(j)]))
        throw ValidationError("T: row " + std::to_string(i) + " does not match neighbour responses");
  }
}

Eigen::VectorXd SpatialDataset::neighborhood_of(const Site& target) const {
  const auto nn = knn_query(obs.sites, target.x, target.y, k());
  Eigen::VectorXd t(k());
  for (int j = 0; j < k(); ++j) t(j) = obs.Y(nn[static_cast<std::size_t>(j)]);
  return t;
}

PartialResiduals partial_residuals(const SpatialDataset& data, const WeightMatrix& W) {
  if (W.rows() != data.n() || W.values.cols() != data.n())
    throw ValidationError("W: dimensions must match the dataset");
  PartialResiduals pr;
  pr.y = data.Y() - W.values * data.Y();
  pr.x = data.X() - W.values * data.X();
  return pr;
}

BetaFit fit_beta(const Eigen::MatrixXd& Xt, const Eigen::VectorXd& Yt, double reference_norm) {
  if (Xt.rows() != Yt.size()) throw ValidationError("fit_beta: row counts differ");
  if (Xt.rows() <= Xt.cols()) throw ValidationError("fit_beta: need more observations than covariates");
  if (Xt.cols() == 0) throw ValidationError("fit_beta: no covariates");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xt);
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(Xt.cols(), Xt.cols()).triangularView<Eigen::Upper>();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(R).singularValues();
  const double smax = std::max(sv(0), reference_norm);
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? (smax / smin) * (smax / smin) : std::numeric_limits<double>::infinity();
  if (!(cond < kMaxCondition)) throw IllConditionedError(cond);

  BetaFit out;
  out.beta = qr.solve(Yt);
  out.cond = cond;
  return out;
}

Eigen::VectorXd fit_r(const WeightMatrix& W, const Eigen::VectorXd& Y, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& beta_hat) {
  if (W.rows() != Y.size() || X.rows() != Y.size() || X.cols() != beta_hat.size())
    throw ValidationError("fit_r: dimension mismatch");
  return W.values * (Y - X * beta_hat);
}

FitResult fit(const SpatialDataset& data, const BandwidthConfig& cfg, WeightOptions opts) {
  if (cfg.k != data.k()) throw ValidationError("k: configuration and dataset neighbourhoods differ");
  const WeightMatrix W = weight_matrix(data.sites(), data.T, cfg, opts);
  const PartialResiduals pr = partial_residuals(data, W);
  const double ref = data.X().colwise().norm().maxCoeff();
  const BetaFit bf = fit_beta(pr.x, pr.y, ref);

  FitResult fr;
  fr.beta_hat = bf.beta;
  fr.cond = bf.cond;
  fr.r_hat = fit_r(W, data.Y(), data.X(), bf.beta);
  fr.cfg = cfg;
  fr.fallback_rows = W.fallback_rows;
  return fr;
}

Eigen::VectorXd fitted_values(const SpatialDataset& data, const FitResult& fr) {
  return data.X() * fr.beta_hat + fr.r_hat;
}

double predict(const Eigen::VectorXd& x0, const Site& target, const SpatialDataset& data, const FitResult& fr,
               WeightOptions opts) {
  if (x0.size() != fr.beta_hat.size()) throw ValidationError("x0: length must equal p");
  const Eigen::VectorXd t0 = data.neighborhood_of(target);
  const WeightRow w = weight_row(target, std::span<const double>(t0.data(), static_cast<std::size_t>(t0.size())),
                                 data.sites(), data.T, fr.cfg, opts);
  const Eigen::VectorXd resid = data.Y() - data.X() * fr.beta_hat;
  return x0.dot(fr.beta_hat) + w.values.dot(resid);
}

Eigen::VectorXd predict_many(const Eigen::MatrixXd& X0, const SiteSet& targets, const SpatialDataset& data,
                             const FitResult& fr, WeightOptions opts) {
  if (X0.rows() != static_cast<Eigen::Index>(targets.size())) throw ValidationError("X0: one row per target");
  if (X0.cols() != fr.beta_hat.size()) throw ValidationError("X0: column count must equal p");
  const Eigen::VectorXd resid = data.Y() - data.X() * fr.beta_hat;
  const Eigen::VectorXd med = neighborhood_medians(data.T);
  const auto m = static_cast<long>(targets.size());
  Eigen::VectorXd out(m);
  std::vector<char> failed(static_cast<std::size_t>(m), 0);
#pragma omp parallel for schedule(dynamic, 8)
  for (long t = 0; t < m; ++t) {
    try {
      const Eigen::VectorXd t0 = data.neighborhood_of(targets[static_cast<std::size_t>(t)]);
      const double m0 = median(std::span<const double>(t0.data(), static_cast<std::size_t>(t0.size())));
      const WeightRow w = weight_row(targets[static_cast<std::size_t>(t)], m0, data.sites(), med, fr.cfg, opts);
      out(t) = X0.row(t).dot(fr.beta_hat) + w.values.dot(resid);
    } catch (...) {
      failed[static_cast<std::size_t>(t)] = 1;
    }
  }
  for (long t = 0; t < m; ++t)
    if (failed[static_cast<std::size_t>(t)]) {
      // rerun serially to surface the original exception
      predict(X0.row(t).transpose(), targets[static_cast<std::size_t>(t)], data, fr, opts);
    }
  return out;
}

}  // namespace semisar
