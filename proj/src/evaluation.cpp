#include "semisar/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semisar/baselines.hpp"
#include "semisar/errors.hpp"
#include "semisar/rng.hpp"

namespace semisar {

std::string to_string(Method m) {
  switch (m) {
    case Method::K1S: return "K1S";
    case Method::K1ME: return "K1ME";
    case Method::K2ME: return "K2ME";
    case Method::K1M: return "K1M";
    case Method::OLS: return "OLS";
    case Method::SAR: return "SAR";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "OLS") return Method::OLS;
  if (name == "SAR") return Method::SAR;
  switch (parse_variant(name)) {
    case WeightVariant::K1S: return Method::K1S;
    case WeightVariant::K1ME: return Method::K1ME;
    case WeightVariant::K2ME: return Method::K2ME;
    case WeightVariant::K1M: return Method::K1M;
  }
  throw ValidationError("method: unknown value '" + name + "'");
}

bool is_kernel_method(Method m) noexcept { return m != Method::OLS && m != Method::SAR; }

WeightVariant variant_of(Method m) {
  switch (m) {
    case Method::K1S: return WeightVariant::K1S;
    case Method::K1ME: return WeightVariant::K1ME;
    case Method::K2ME: return WeightVariant::K2ME;
    case Method::K1M: return WeightVariant::K1M;
    default: throw ValidationError("method: " + to_string(m) + " has no weight variant");
  }
}

namespace {

double sample_sd(const Eigen::VectorXd& v, double mean) {
  if (v.size() < 2) return 0.0;
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

Observations apply_standardization(const Observations& obs, const StandardizationParams& params) {
  if (params.x_mean.size() != obs.p()) throw ValidationError("standardization: covariate count mismatch");
  Observations out = obs;
  out.Y = (obs.Y.array() - params.y_mean) / params.y_sd;
  for (Eigen::Index j = 0; j < obs.p(); ++j)
    out.X.col(j) = (obs.X.col(j).array() - params.x_mean(j)) / params.x_sd(j);
  return out;
}

StandardizedSplit standardize(const Observations& train, const Observations& test) {
  train.validate();
  test.validate();
  if (train.n() < 2) throw ValidationError("standardize: training set needs at least two sites");
  if (test.p() != train.p()) throw ValidationError("standardize: covariate count mismatch");
  StandardizationParams prm;
  prm.y_mean = train.Y.mean();
  prm.y_sd = sample_sd(train.Y, prm.y_mean);
  if (!(prm.y_sd > 0.0)) throw ValidationError("standardize: column Y has zero variance");
  prm.x_mean.resize(train.p());
  prm.x_sd.resize(train.p());
  for (Eigen::Index j = 0; j < train.p(); ++j) {
    prm.x_mean(j) = train.X.col(j).mean();
    prm.x_sd(j) = sample_sd(train.X.col(j), prm.x_mean(j));
    if (!(prm.x_sd(j) > 0.0)) {
      const std::string name = static_cast<std::size_t>(j) < train.covariate_names.size()
                                   ? train.covariate_names[static_cast<std::size_t>(j)]
                                   : "X" + std::to_string(j + 1);
      throw ValidationError("standardize: column " + name + " has zero variance");
    }
  }
  return {apply_standardization(train, prm), apply_standardization(test, prm), prm};
}

Eigen::VectorXd to_original_scale(const Eigen::VectorXd& beta_std, const StandardizationParams& params) {
  return (beta_std.array() * params.y_sd / params.x_sd.array()).matrix();
}

double mae_beta(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true) {
  if (beta_hat.size() != beta_true.size() || beta_hat.size() == 0)
    throw ValidationError("mae_beta: length mismatch");
  return (beta_hat - beta_true).cwiseAbs().mean();
}

Split split_sites(std::size_t n, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ValidationError("train_frac: must lie in (0, 1)");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, {kStreamSplit}));
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::lround(train_frac * static_cast<double>(n)));
  Split s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<long>(n_train));
  s.test.assign(perm.begin() + static_cast<long>(n_train), perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

void ExperimentConfig::validate() const {
  sim.validate();
  if (replications < 1) throw ValidationError("replications: must be at least 1");
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ValidationError("train_frac: must lie in (0, 1)");
  if (methods.empty()) throw ValidationError("methods: at least one method is required");
  for (std::size_t i = 0; i < methods.size(); ++i)
    for (std::size_t j = i + 1; j < methods.size(); ++j)
      if (methods[i] == methods[j]) throw ValidationError("methods: duplicate method " + to_string(methods[i]));
  SearchSpace s = search;
  s.normalize();
}

namespace {

ReplicationRecord run_method(Method method, const StandardizedSplit& sp, const Eigen::VectorXd& beta_true,
                             const ExperimentConfig& cfg, std::uint64_t cv_seed) {
  ReplicationRecord rec;
  rec.method = method;
  Eigen::VectorXd beta_std;
  Eigen::VectorXd pred;

  if (is_kernel_method(method)) {
    SearchSpace space = cfg.search;
    space.variant = variant_of(method);
    const SelectionResult sel = cv_select(sp.train, space, cv_seed, cfg.weights);
    const SpatialDataset data = SpatialDataset::build(sp.train, sel.best.k);
    const FitResult fr = fit(data, sel.best, cfg.weights);
    pred = predict_many(sp.test.X, sp.test.sites, data, fr, cfg.weights);
    beta_std = fr.beta_hat;
    rec.cfg = sel.best;
  } else if (method == Method::OLS) {
    beta_std = ols_fit(sp.train.X, sp.train.Y);
    pred = sp.test.X * beta_std;
  } else {
    const WeightMatrix V = build_V(sp.train.sites, cfg.sim.v_bandwidth);
    const SarFit sf = sar_ml_fit(sp.train.X, sp.train.Y, V);
    beta_std = sf.beta_hat;
    rec.rho_hat = sf.rho_hat;
    BandwidthConfig vcfg;
    vcfg.variant = WeightVariant::K1S;
    vcfg.h1 = cfg.sim.v_bandwidth;
    vcfg.k = 4;
    const Eigen::VectorXd zero_med = Eigen::VectorXd::Zero(sp.train.n());
    pred.resize(sp.test.n());
    for (Eigen::Index t = 0; t < sp.test.n(); ++t) {
      const WeightRow w = weight_row(sp.test.sites[static_cast<std::size_t>(t)], 0.0, sp.train.sites, zero_med, vcfg);
      pred(t) = sp.test.X.row(t).dot(beta_std) + sf.rho_hat * w.values.dot(sp.train.Y);
    }
  }
  rec.rmse = rmse(pred, sp.test.Y);
  rec.beta_hat = to_original_scale(beta_std, sp.params);
  rec.mae_beta = mae_beta(rec.beta_hat, beta_true);
  return rec;
}

}  // namespace

std::vector<ReplicationRecord> run_replication(const SimulatedData& data, const ExperimentConfig& cfg, int rep) {
  const auto r = static_cast<std::uint64_t>(rep);
  const Split split = split_sites(static_cast<std::size_t>(data.obs.n()), cfg.train_frac,
                                  derive_seed(cfg.master_seed, {r, kStreamSplit}));
  const StandardizedSplit sp = standardize(data.obs.subset(split.train), data.obs.subset(split.test));
  std::vector<ReplicationRecord> out;
  for (Method m : cfg.methods) {
    ReplicationRecord rec;
    try {
      rec = run_method(m, sp, data.beta_true, cfg, derive_seed(cfg.master_seed, {r, kStreamFolds}));
    } catch (const std::exception& e) {
      rec = ReplicationRecord{};
      rec.method = m;
      rec.ok = false;
      rec.error = e.what();
    }
    rec.rep = rep;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<MethodAggregate> aggregate(const std::vector<ReplicationRecord>& records, const std::vector<Method>& methods) {
  std::vector<MethodAggregate> out;
  for (Method m : methods) {
    MethodAggregate a;
    a.method = m;
    std::vector<double> rm, ma;
    for (const auto& r : records) {
      if (r.method != m) continue;
      if (!r.ok) {
        ++a.failures;
        continue;
      }
      rm.push_back(r.rmse);
      ma.push_back(r.mae_beta);
    }
    a.count = static_cast<int>(rm.size());
    auto stats = [](std::vector<double> v, double& mean, double& sd, double& med) {
      if (v.empty()) {
        mean = sd = med = std::nan("");
        return;
      }
      double s = 0.0;
      for (double x : v) s += x;
      mean = s / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      std::sort(v.begin(), v.end());
      const std::size_t h = v.size() / 2;
      med = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    };
    stats(rm, a.rmse_mean, a.rmse_sd, a.rmse_median);
    stats(ma, a.mae_mean, a.mae_sd, a.mae_median);
    out.push_back(a);
  }
  return out;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Simulator sim(cfg.sim);
  std::vector<std::vector<ReplicationRecord>> per_rep(static_cast<std::size_t>(cfg.replications));
#pragma omp parallel for schedule(dynamic, 1)
  for (int rep = 0; rep < cfg.replications; ++rep) {
    try {
      per_rep[static_cast<std::size_t>(rep)] = run_replication(sim.draw(static_cast<std::uint64_t>(rep)), cfg, rep);
    } catch (const std::exception& e) {
      for (Method m : cfg.methods) {
        ReplicationRecord rec;
        rec.method = m;
        rec.rep = rep;
        rec.ok = false;
        rec.error = e.what();
        per_rep[static_cast<std::size_t>(rep)].push_back(rec);
      }
    }
  }
  ExperimentSummary s;
  s.cfg = cfg;
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
    for (const auto& recs : per_rep) s.records.push_back(recs[mi]);
  s.aggregates = aggregate(s.records, cfg.methods);
  return s;
}

}  // namespace semisar
