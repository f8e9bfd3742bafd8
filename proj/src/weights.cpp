#include "semisar/weights.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "semisar/errors.hpp"

namespace semisar {

std::string to_string(WeightVariant v) {
  switch (v) {
    case WeightVariant::K1S: return "K1S";
    case WeightVariant::K1ME: return "K1ME";
    case WeightVariant::K2ME: return "K2ME";
    case WeightVariant::K1M: return "K1M";
  }
  return "unknown";
}

WeightVariant parse_variant(const std::string& name) {
  if (name == "K1S" || name == "KS1") return WeightVariant::K1S;
  if (name == "K1ME") return WeightVariant::K1ME;
  if (name == "K2ME") return WeightVariant::K2ME;
  if (name == "K1M") return WeightVariant::K1M;
  throw ValidationError("variant: unknown value '" + name + "'");
}

void BandwidthConfig::validate() const {
  if (!std::isfinite(h1) || h1 <= 0.0) throw ValidationError("h1: must be finite and positive");
  if (!std::isfinite(h2) || h2 <= 0.0) throw ValidationError("h2: must be finite and positive");
  if (k < 1) throw ValidationError("k: must be at least 1");
}

double pair_kernel(const BandwidthConfig& cfg, double geo, double dm) noexcept {
  switch (cfg.variant) {
    case WeightVariant::K1S: return kernel_value(cfg.kernel1, geo / cfg.h1);
    case WeightVariant::K1ME: return kernel_value(cfg.kernel2, dm / cfg.h2);
    case WeightVariant::K2ME: {
      const double g = kernel_value(cfg.kernel1, geo / cfg.h1);
      return g == 0.0 ? 0.0 : g * kernel_value(cfg.kernel2, dm / cfg.h2);
    }
    case WeightVariant::K1M: return kernel_value(cfg.kernel1, geo * dm / cfg.h1);
  }
  return 0.0;
}

Eigen::VectorXd neighborhood_medians(const Eigen::MatrixXd& T) {
  Eigen::VectorXd med(T.rows());
  std::vector<double> buf(static_cast<std::size_t>(T.cols()));
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    for (Eigen::Index j = 0; j < T.cols(); ++j) buf[static_cast<std::size_t>(j)] = T(i, j);
    med(i) = median(buf);
  }
  return med;
}

namespace {

// Fills `row` with numerators against every site except `self` (and any site
// at distance 0 when self < 0); returns the row mass.
double fill_numerators(double* row, const Site& target, double target_median, long self, const SiteSet& sites,
                       const Eigen::VectorXd& medians, const BandwidthConfig& cfg) {
  const bool geo_support = cfg.variant == WeightVariant::K1S || cfg.variant == WeightVariant::K2ME;
  double mass = 0.0;
  for (std::size_t j = 0; j < sites.size(); ++j) {
    const double dx = target.x - sites[j].x, dy = target.y - sites[j].y;
    const double d2 = dx * dx + dy * dy;
    if (static_cast<long>(j) == self || (self < 0 && d2 == 0.0) || (geo_support && d2 > cfg.h1 * cfg.h1)) {
      row[j] = 0.0;
      continue;
    }
    const double w = pair_kernel(cfg, std::sqrt(d2), std::abs(target_median - medians(static_cast<Eigen::Index>(j))));
    row[j] = w;
    mass += w;
  }
  return mass;
}

void uniform_over(double* row, std::size_t n, const std::vector<int>& neighbors) {
  std::fill(row, row + n, 0.0);
  const double w = 1.0 / static_cast<double>(neighbors.size());
  for (int j : neighbors) row[j] = w;
}

void normalize(double* row, std::size_t n, double mass) {
  const double inv = 1.0 / mass;
  for (std::size_t j = 0; j < n; ++j) row[j] *= inv;
}

void check_shapes(const SiteSet& sites, const Eigen::MatrixXd& T, const BandwidthConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(T.rows()) != sites.size())
    throw ValidationError("T: row count must equal the number of sites");
  if (T.cols() != cfg.k) throw ValidationError("T: column count must equal k");
}

}  // namespace

WeightMatrix weight_matrix(const SiteSet& sites, const Eigen::MatrixXd& T, const BandwidthConfig& cfg,
                           WeightOptions opts) {
  check_shapes(sites, T, cfg);
  const auto n = static_cast<long>(sites.size());
  if (n < 2) throw ValidationError("sites: need at least two sites");
  const Eigen::VectorXd med = neighborhood_medians(T);

  WeightMatrix W;
  W.values.resize(n, n);
  W.row_mass.resize(n);
  std::vector<char> fell_back(static_cast<std::size_t>(n), 0);
  std::atomic<long> first_empty{-1};

#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    double* row = W.values.row(i).data();
    const double mass = fill_numerators(row, sites[static_cast<std::size_t>(i)], med(i), i, sites, med, cfg);
    W.row_mass(i) = mass;
    if (mass > 0.0) {
      normalize(row, static_cast<std::size_t>(n), mass);
    } else if (opts.strict) {
      long expected = -1;
      first_empty.compare_exchange_strong(expected, i);
    } else {
      const auto& s = sites[static_cast<std::size_t>(i)];
      std::vector<int> nn;
      {
        // nearest excluding self; tie order by position
        std::vector<std::pair<double, int>> cand;
        cand.reserve(static_cast<std::size_t>(n - 1));
        for (long j = 0; j < n; ++j)
          if (j != i) {
            const double dx = s.x - sites[static_cast<std::size_t>(j)].x, dy = s.y - sites[static_cast<std::size_t>(j)].y;
            cand.emplace_back(dx * dx + dy * dy, static_cast<int>(j));
          }
        const auto kk = std::min<std::size_t>(static_cast<std::size_t>(cfg.k), cand.size());
        std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(kk), cand.end());
        for (std::size_t q = 0; q < kk; ++q) nn.push_back(cand[q].second);
      }
      uniform_over(row, static_cast<std::size_t>(n), nn);
      fell_back[static_cast<std::size_t>(i)] = 1;
    }
  }
  if (first_empty.load() >= 0) {
    // report the smallest offending row regardless of scheduling
    for (long i = 0; i < n; ++i)
      if (W.row_mass(i) == 0.0) throw EmptyNeighborhoodError(i);
  }
  for (long i = 0; i < n; ++i)
    if (fell_back[static_cast<std::size_t>(i)]) W.fallback_rows.push_back(static_cast<int>(i));
  return W;
}

WeightRow weight_row(const Site& target, double target_median, const SiteSet& sites, const Eigen::VectorXd& medians,
                     const BandwidthConfig& cfg, WeightOptions opts) {
  cfg.validate();
  if (static_cast<std::size_t>(medians.size()) != sites.size())
    throw ValidationError("medians: size must equal the number of sites");
  WeightRow out;
  out.values.resize(static_cast<Eigen::Index>(sites.size()));
  double* row = out.values.data();
  const double mass = fill_numerators(row, target, target_median, -1, sites, medians, cfg);
  if (mass > 0.0) {
    normalize(row, sites.size(), mass);
    return out;
  }
  if (opts.strict) throw EmptyNeighborhoodError(-1);
  uniform_over(row, sites.size(), knn_query(sites, target.x, target.y, std::min<int>(cfg.k, static_cast<int>(sites.size()))));
  out.fallback = true;
  return out;
}

WeightRow weight_row(const Site& target, std::span<const double> target_T, const SiteSet& sites,
                     const Eigen::MatrixXd& T, const BandwidthConfig& cfg, WeightOptions opts) {
  check_shapes(sites, T, cfg);
  if (target_T.size() != static_cast<std::size_t>(cfg.k)) throw ValidationError("target_T: length must equal k");
  return weight_row(target, median(target_T), sites, neighborhood_medians(T), cfg, opts);
}

}  // namespace semisar
