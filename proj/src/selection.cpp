#include "semisar/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "semisar/errors.hpp"
#include "semisar/rng.hpp"

namespace semisar {

SearchSpace SearchSpace::defaults(WeightVariant variant) {
  SearchSpace s;
  s.h1_set = {0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0};
  s.h2_set = s.h1_set;
  s.k_set = {4, 8, 12};
  s.variant = variant;
  return s;
}

void SearchSpace::normalize() {
  auto tidy = [](auto& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  tidy(h1_set);
  tidy(h2_set);
  tidy(k_set);
  validate();
}

void SearchSpace::validate() const {
  if (h1_set.empty() || h2_set.empty() || k_set.empty()) throw ValidationError("search space: candidate sets must be non-empty");
  for (double h : h1_set)
    if (!std::isfinite(h) || h <= 0.0) throw ValidationError("h1_set: candidates must be finite and positive");
  for (double h : h2_set)
    if (!std::isfinite(h) || h <= 0.0) throw ValidationError("h2_set: candidates must be finite and positive");
  for (int k : k_set)
    if (k < 1) throw ValidationError("k_set: candidates must be at least 1");
  if (!loo && folds < 2) throw ValidationError("folds: must be at least 2");
}

std::vector<BandwidthConfig> SearchSpace::configs() const {
  BandwidthConfig probe;
  probe.variant = variant;
  const std::vector<double> h1s = probe.uses_h1() ? h1_set : std::vector<double>{h1_set.front()};
  const std::vector<double> h2s = probe.uses_h2() ? h2_set : std::vector<double>{h2_set.front()};
  std::vector<BandwidthConfig> out;
  for (int k : k_set)
    for (double h2 : h2s)
      for (double h1 : h1s) {
        BandwidthConfig c;
        c.variant = variant;
        c.h1 = h1;
        c.h2 = h2;
        c.k = k;
        c.kernel1 = kernel1;
        c.kernel2 = kernel2;
        out.push_back(c);
      }
  return out;
}

double rmse(std::span<const double> pred, std::span<const double> actual) {
  if (pred.empty() || pred.size() != actual.size()) throw ValidationError("rmse: inputs must be non-empty and equal length");
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - actual[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual) {
  return rmse(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
              std::span<const double>(actual.data(), static_cast<std::size_t>(actual.size())));
}

std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, {kStreamFolds}));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> label(n);
  for (std::size_t t = 0; t < n; ++t) label[static_cast<std::size_t>(perm[t])] = static_cast<int>(t % static_cast<std::size_t>(folds));
  return label;
}

namespace {

struct Fold {
  std::vector<int> train;
  std::vector<int> held;
};

std::vector<Fold> make_folds(std::size_t n, int folds, std::uint64_t seed) {
  const auto label = fold_assignment(n, folds, seed);
  std::vector<Fold> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < n; ++i)
    for (int f = 0; f < folds; ++f)
      (label[i] == f ? out[static_cast<std::size_t>(f)].held : out[static_cast<std::size_t>(f)].train).push_back(static_cast<int>(i));
  return out;
}

// Training datasets per (fold, k): neighbourhoods only see training responses.
struct FoldData {
  SpatialDataset train;
  Observations held;
};

double score_loo(const SpatialDataset& full, const BandwidthConfig& cfg, WeightOptions opts) {
  const FitResult fr = fit(full, cfg, opts);
  return rmse(fitted_values(full, fr), full.Y());
}

double score_folds(const std::vector<FoldData>& fds, const BandwidthConfig& cfg, WeightOptions opts) {
  double ss = 0.0;
  std::size_t count = 0;
  for (const auto& fd : fds) {
    const FitResult fr = fit(fd.train, cfg, opts);
    const Eigen::VectorXd pred = predict_many(fd.held.X, fd.held.sites, fd.train, fr, opts);
    ss += (pred - fd.held.Y).squaredNorm();
    count += static_cast<std::size_t>(pred.size());
  }
  return std::sqrt(ss / static_cast<double>(count));
}

void check_fold_sizes(const Observations& data, int folds, bool loo, int max_k) {
  const auto n = static_cast<long>(data.n());
  const long smallest_train = loo ? n - 1 : n - (n + folds - 1) / folds;
  if (smallest_train < max_k + 1 || (!loo && n < folds))
    throw ValidationError("data too small: every fold must leave at least max(k)+1 training sites");
}

}  // namespace

double cv_score(const Observations& data, const BandwidthConfig& cfg, int folds, bool loo, std::uint64_t seed,
                WeightOptions opts) {
  cfg.validate();
  check_fold_sizes(data, folds, loo, cfg.k);
  if (loo) return score_loo(SpatialDataset::build(data, cfg.k), cfg, opts);
  std::vector<FoldData> fds;
  for (const auto& f : make_folds(static_cast<std::size_t>(data.n()), folds, seed))
    fds.push_back({SpatialDataset::build(data.subset(f.train), cfg.k), data.subset(f.held)});
  return score_folds(fds, cfg, opts);
}

SelectionResult cv_select(const Observations& data, SearchSpace space, std::uint64_t seed, WeightOptions opts) {
  space.normalize();
  data.validate();
  check_fold_sizes(data, space.folds, space.loo, space.k_set.back());

  // Datasets depend on k only; build them once and share across configs.
  std::map<int, std::vector<FoldData>> per_k;
  std::map<int, SpatialDataset> full_k;
  const auto folds = space.loo ? std::vector<Fold>{} : make_folds(static_cast<std::size_t>(data.n()), space.folds, seed);
  for (int k : space.k_set) {
    if (space.loo) {
      full_k.emplace(k, SpatialDataset::build(data, k));
    } else {
      auto& v = per_k[k];
      for (const auto& f : folds) v.push_back({SpatialDataset::build(data.subset(f.train), k), data.subset(f.held)});
    }
  }

  const auto cfgs = space.configs();
  std::vector<ScoredConfig> table(cfgs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long c = 0; c < static_cast<long>(cfgs.size()); ++c) {
    const auto& cfg = cfgs[static_cast<std::size_t>(c)];
    auto& entry = table[static_cast<std::size_t>(c)];
    entry.cfg = cfg;
    try {
      entry.cv_rmse = space.loo ? score_loo(full_k.at(cfg.k), cfg, opts) : score_folds(per_k.at(cfg.k), cfg, opts);
      entry.feasible = std::isfinite(entry.cv_rmse);
    } catch (const NumericalError&) {
      entry.feasible = false;
    }
    if (!entry.feasible) entry.cv_rmse = std::numeric_limits<double>::infinity();
  }

  double min_score = std::numeric_limits<double>::infinity();
  for (const auto& e : table)
    if (e.feasible) min_score = std::min(min_score, e.cv_rmse);
  if (!std::isfinite(min_score)) throw NumericalError("no feasible configuration");

  auto key = [](const BandwidthConfig& c) { return std::make_tuple(c.k, c.h2, c.h1); };
  const ScoredConfig* best = nullptr;
  for (const auto& e : table)
    if (e.feasible && e.cv_rmse <= min_score + 1e-12 && (!best || key(e.cfg) < key(best->cfg))) best = &e;

  SelectionResult res;
  res.best = best->cfg;
  res.best_score = best->cv_rmse;
  for (const auto& e : table)
    if (e.feasible && e.cv_rmse <= min_score + 1e-12) ++res.ties;
  res.score_table = std::move(table);
  return res;
}

}  // namespace semisar
