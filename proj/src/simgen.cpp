#include "semisar/simgen.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "semisar/errors.hpp"
#include "semisar/rng.hpp"

namespace semisar {

std::string to_string(CovKind k) {
  switch (k) {
    case CovKind::SphericalNugget: return "spherical_nugget";
    case CovKind::Spherical: return "spherical";
    case CovKind::Gaussian: return "gaussian";
    case CovKind::Sinc: return "sinc";
  }
  return "unknown";
}

CovKind parse_cov_kind(const std::string& name) {
  for (auto k : kAllCovKinds)
    if (to_string(k) == name) return k;
  throw ValidationError("model: unknown value '" + name + "'");
}

CovModel CovModel::standard(CovKind kind) {
  switch (kind) {
    case CovKind::SphericalNugget: return {kind, 1.0, 0.1, 0.5};
    case CovKind::Spherical: return {kind, 1.0, 0.0, 0.5};
    case CovKind::Gaussian: return {kind, 1.0, 0.1, 0.5};
    case CovKind::Sinc: return {kind, 1.0, 0.1, 0.05};
  }
  throw ValidationError("model: unknown kind");
}

double sinc_bessel_form(double m1, double m2, double theta, double h) {
  const double x = h / theta;
  return m1 / (m1 + m2) * std::sqrt(2.0 * theta / h) * std::tgamma(1.5) * std::cyl_bessel_j(0.5, x);
}

double correlation(const CovModel& model, double h) {
  if (!(h >= 0.0) || !std::isfinite(h)) throw ValidationError("correlation: distance must be finite and non-negative");
  if (h == 0.0) return 1.0;
  const double sill = model.m1 / (model.m1 + model.m2);
  const double u = h / model.range;
  switch (model.kind) {
    case CovKind::SphericalNugget:
    case CovKind::Spherical: return u >= 1.0 ? 0.0 : sill * (1.0 - 1.5 * u + 0.5 * u * u * u);
    case CovKind::Gaussian: return sill * std::exp(-u * u);
    case CovKind::Sinc: return sinc_bessel_form(model.m1, model.m2, model.range, h);
  }
  return 0.0;
}

CorrelationFactor factor_correlation(const SiteSet& sites, const CovModel& model) {
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd R(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < n; ++i) {
    R(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double h = scaled_geo_distance(sites[static_cast<std::size_t>(i)], sites[static_cast<std::size_t>(j)]);
      R(i, j) = R(j, i) = correlation(model, h);
    }
  }
  for (double jitter : {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (jitter == 0.0) {
      llt.compute(R);
    } else {
      Eigen::MatrixXd Rj = R;
      Rj.diagonal().array() += jitter;
      llt.compute(Rj);
    }
    if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
  }
  throw NumericalError("covariance not PD (" + to_string(model.kind) + ")");
}

FieldSampler::FieldSampler(const SiteSet& sites) : n_(sites.size()) {
  for (std::size_t m = 0; m < kAllCovKinds.size(); ++m)
    factors_[m] = factor_correlation(sites, CovModel::standard(kAllCovKinds[m]));
}

const CorrelationFactor& FieldSampler::factor(CovKind kind) const {
  return factors_[static_cast<std::size_t>(kind)];
}

CovariateDraw FieldSampler::draw(int p, std::uint64_t seed, const CovariateOverrides& ov) const {
  if (p < 1) throw ValidationError("p: must be at least 1");
  if (ov.pair_rho && !(std::abs(*ov.pair_rho) <= 1.0)) throw ValidationError("pair_rho: must lie in [-1, 1]");
  const auto n = static_cast<Eigen::Index>(n_);
  Rng rng(derive_seed(seed, {kStreamCovariates}));
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_real_distribution<double> mean(0.5, 2.0);
  std::uniform_real_distribution<double> pair(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  CovariateDraw out;
  out.X.resize(n, p);
  out.meta.resize(static_cast<std::size_t>(p));
  Eigen::MatrixXd Z(n, p);

  for (int u = 0; u < p; ++u) {
    auto& meta = out.meta[static_cast<std::size_t>(u)];
    const int drawn = pick(rng);
    meta.model = ov.model ? *ov.model : kAllCovKinds[static_cast<std::size_t>(drawn)];
    meta.mean = mean(rng);
    for (Eigen::Index i = 0; i < n; ++i) Z(i, u) = normal(rng);
    // 1-based u+1 even with a partner u+2 -> 0-based pairs (1,2), (3,4), ...
    if (u % 2 == 1 && u + 1 < p) {
      const double r = pair(rng);
      out.meta[static_cast<std::size_t>(u + 1)].pair_rho = ov.pair_rho ? *ov.pair_rho : r;
      out.meta[static_cast<std::size_t>(u + 1)].partner = u;
      meta.partner = u + 1;
    }
  }
  for (int u = 0; u < p; ++u) {
    auto& meta = out.meta[static_cast<std::size_t>(u)];
    if (meta.partner >= 0 && meta.partner < u) {
      out.meta[static_cast<std::size_t>(meta.partner)].pair_rho = meta.pair_rho;
      const double r = meta.pair_rho;
      Z.col(u) = r * Z.col(meta.partner) + std::sqrt(std::max(0.0, 1.0 - r * r)) * Z.col(u);
    }
  }
  for (int u = 0; u < p; ++u) {
    auto& meta = out.meta[static_cast<std::size_t>(u)];
    const auto& f = factor(meta.model);
    meta.jitter = f.jitter;
    out.X.col(u) = (f.L.triangularView<Eigen::Lower>() * Z.col(u)).array() + meta.mean;
  }
  return out;
}

CovariateDraw simulate_covariates(const SiteSet& sites, int p, std::uint64_t seed, const CovariateOverrides& ov) {
  return FieldSampler(sites).draw(p, seed, ov);
}

WeightMatrix build_V(const SiteSet& sites, double bandwidth) {
  BandwidthConfig cfg;
  cfg.variant = WeightVariant::K1S;
  cfg.h1 = bandwidth;
  cfg.k = 4;
  const Eigen::MatrixXd T = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sites.size()), cfg.k);
  return weight_matrix(sites, T, cfg);
}

SarSystem::SarSystem(const WeightMatrix& V, double rho) : rho_(rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("rho: must lie in [0, 1)");
  const auto n = V.rows();
  A_ = RowMatrix::Identity(n, n) - rho * V.values;
  lu_.compute(A_);
}

Eigen::VectorXd SarSystem::solve(const Eigen::VectorXd& rhs, double* residual) const {
  Eigen::VectorXd y = lu_.solve(rhs);
  y += lu_.solve(rhs - A_ * y);
  const double res = (A_ * y - rhs).lpNorm<Eigen::Infinity>();
  if (residual) *residual = res;
  const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  if (!y.allFinite() || res > 1e-8 * scale)
    throw NumericalError("SAR solve failed (residual " + std::to_string(res) + ")");
  return y;
}

SarDraw simulate_response(const Eigen::MatrixXd& X, const SarSystem& system, std::uint64_t seed, double beta_sd) {
  if (!(beta_sd > 0.0)) throw ValidationError("beta_sd: must be positive");
  Rng rng(derive_seed(seed, {kStreamResponse}));
  std::normal_distribution<double> normal(0.0, 1.0);
  SarDraw d;
  d.beta.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) d.beta(j) = beta_sd * normal(rng);
  d.eps.resize(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) d.eps(i) = normal(rng);
  const Eigen::VectorXd rhs = X * d.beta + d.eps;
  d.Y = system.rho() == 0.0 ? rhs : system.solve(rhs, &d.residual);
  return d;
}

SarDraw simulate_response(const Eigen::MatrixXd& X, const WeightMatrix& V, double rho, std::uint64_t seed,
                          double beta_sd) {
  if (V.rows() != X.rows()) throw ValidationError("V: dimension must match X");
  return simulate_response(X, SarSystem(V, rho), seed, beta_sd);
}

void SimConfig::validate() const {
  if (n < 4) throw ValidationError("n: must be at least 4");
  if (p < 1) throw ValidationError("p: must be at least 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("rho: must lie in [0, 1)");
  if (!(beta_sd > 0.0) || !std::isfinite(beta_sd)) throw ValidationError("beta_sd: must be positive");
  if (!(v_bandwidth > 0.0) || !std::isfinite(v_bandwidth)) throw ValidationError("v_bandwidth: must be positive");
  if (parent_count != 0 && parent_count < n) throw ValidationError("parent_count: must be 0 or at least n");
  if (design == Design::Regular) {
    const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (r * r != n) throw ValidationError("n: invalid regular count " + std::to_string(n));
  }
}

namespace {

SiteSet field_sites_for(const SimConfig& cfg) {
  cfg.validate();
  return generate_sites(cfg.design, cfg.parent_count > 0 ? cfg.parent_count : cfg.n, cfg.seed);
}

std::vector<int> sample_positions_for(const SimConfig& cfg, const SiteSet& field) {
  std::vector<int> pos;
  if (cfg.parent_count == 0 || cfg.n == cfg.parent_count) {
    pos.resize(field.size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<int>(i);
    return pos;
  }
  const int sizes[] = {cfg.n};
  const SiteSet sub = nested_subsamples(field, sizes).front();
  // Site identifiers of generated sets equal their parent positions.
  for (const auto& s : sub.sites) pos.push_back(static_cast<int>(s.index));
  return pos;
}

}  // namespace

Simulator::Simulator(SimConfig cfg)
    : cfg_(cfg),
      field_sites_(field_sites_for(cfg)),
      sample_positions_(sample_positions_for(cfg, field_sites_)),
      sampler_(field_sites_),
      sar_(build_V(field_sites_, cfg.v_bandwidth), cfg.rho) {
  sample_sites_ = field_sites_.subset(sample_positions_);
  if (cfg_.parent_count > 0 && cfg_.n != cfg_.parent_count) {
    const int sizes[] = {cfg_.n};
    const SiteSet sub = nested_subsamples(field_sites_, sizes).front();
    sample_sites_.design = sub.design;
    sample_sites_.n_side = sub.n_side;
    sample_sites_.requested_count = sub.requested_count;
    sample_sites_.exact_count = sub.exact_count;
  } else if (cfg_.design == Design::Regular) {
    sample_sites_.n_side = field_sites_.n_side;
  }
}

SimulatedData Simulator::draw(std::uint64_t replication) const {
  const std::uint64_t cov_seed = derive_seed(cfg_.seed, {replication, kStreamCovariates});
  const std::uint64_t resp_seed = derive_seed(cfg_.seed, {replication, kStreamResponse});
  CovariateDraw cov = sampler_.draw(cfg_.p, cov_seed);
  SarDraw resp = simulate_response(cov.X, sar_, resp_seed, cfg_.beta_sd);

  SimulatedData out;
  Observations full;
  full.sites = field_sites_;
  full.Y = std::move(resp.Y);
  full.X = std::move(cov.X);
  for (int u = 0; u < cfg_.p; ++u) full.covariate_names.push_back("X" + std::to_string(u + 1));
  out.obs = full.subset(sample_positions_);
  out.obs.sites = sample_sites_;
  out.beta_true = std::move(resp.beta);
  out.eps.resize(static_cast<Eigen::Index>(sample_positions_.size()));
  for (std::size_t t = 0; t < sample_positions_.size(); ++t)
    out.eps(static_cast<Eigen::Index>(t)) = resp.eps(sample_positions_[t]);
  out.covariates = std::move(cov.meta);
  out.solve_residual = resp.residual;
  return out;
}

SimulatedData simulate(const SimConfig& cfg) { return Simulator(cfg).draw(0); }

}  // namespace semisar
