#include "semisar/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <utility>

#include "semisar/errors.hpp"
#include "semisar/rng.hpp"

namespace semisar {

std::string to_string(Design d) {
  switch (d) {
    case Design::Regular: return "regular";
    case Design::Irregular: return "irregular";
    case Design::Clustered: return "clustered";
  }
  return "unknown";
}

Design parse_design(const std::string& name) {
  if (name == "regular") return Design::Regular;
  if (name == "irregular") return Design::Irregular;
  if (name == "clustered") return Design::Clustered;
  throw ValidationError("design: unknown value '" + name + "'");
}

SiteSet SiteSet::subset(std::span<const int> positions) const {
  SiteSet out;
  out.design = design;
  out.sites.reserve(positions.size());
  for (int p : positions) out.sites.push_back(sites.at(static_cast<std::size_t>(p)));
  out.requested_count = static_cast<int>(positions.size());
  return out;
}

namespace {

constexpr int kClusterCenters = 5;
constexpr double kClusterSigma = 0.05;

int exact_sqrt(int count) {
  const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(count))));
  return r * r == count ? r : -1;
}

SiteSet regular_lattice(int side) {
  SiteSet s;
  s.design = Design::Regular;
  s.n_side = side;
  s.sites.reserve(static_cast<std::size_t>(side) * side);
  const double step = 1.0 / (side - 1);
  for (int row = 0; row < side; ++row)
    for (int col = 0; col < side; ++col)
      s.sites.push_back({col * step, row * step, static_cast<long>(row) * side + col});
  // i/(side-1) is exact at the far corner only up to rounding
  for (auto& site : s.sites) {
    site.x = std::min(site.x, 1.0);
    site.y = std::min(site.y, 1.0);
  }
  return s;
}

inline double dist2(const Site& a, const Site& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

void check_unique(const SiteSet& s) {
  std::set<std::pair<double, double>> seen;
  for (const auto& site : s.sites)
    if (!seen.emplace(site.x, site.y).second)
      throw NumericalError("duplicate site coordinates generated");
}

}  // namespace

SiteSet generate_sites(Design design, int count, std::uint64_t seed) {
  if (count < 4) throw ValidationError("count: must be at least 4");
  if (design == Design::Regular) {
    const int side = exact_sqrt(count);
    if (side < 0) throw ValidationError("invalid regular count: " + std::to_string(count));
    return regular_lattice(side);
  }

  Rng rng(derive_seed(seed, {kStreamSites}));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SiteSet s;
  s.design = design;
  s.sites.reserve(static_cast<std::size_t>(count));

  if (design == Design::Irregular) {
    for (int i = 0; i < count; ++i) {
      const double x = unif(rng);
      const double y = unif(rng);
      s.sites.push_back({x, y, i});
    }
  } else {
    std::uniform_real_distribution<double> center(0.15, 0.85);
    std::array<std::pair<double, double>, kClusterCenters> centers;
    for (auto& c : centers) {
      c.first = center(rng);
      c.second = center(rng);
    }
    std::uniform_int_distribution<int> pick(0, kClusterCenters - 1);
    std::normal_distribution<double> jitter(0.0, kClusterSigma);
    for (int i = 0; i < count; ++i) {
      const auto& c = centers[static_cast<std::size_t>(pick(rng))];
      double x, y;
      do {
        x = c.first + jitter(rng);
        y = c.second + jitter(rng);
      } while (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0);
      s.sites.push_back({x, y, i});
    }
  }
  check_unique(s);
  return s;
}

std::vector<SiteSet> nested_subsamples(const SiteSet& parent, std::span<const int> sizes) {
  if (sizes.empty()) return {};
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1) throw ValidationError("sizes: entries must be positive");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw ValidationError("sizes: must be strictly ascending");
  }
  if (static_cast<std::size_t>(sizes.back()) > parent.size())
    throw ValidationError("sizes: largest request exceeds the parent site count");

  std::vector<SiteSet> out;
  out.reserve(sizes.size());

  if (parent.design == Design::Regular && parent.n_side > 0) {
    const int side = parent.n_side;
    for (int want : sizes) {
      int sub = static_cast<int>(std::lround(std::sqrt(static_cast<double>(want))));
      sub = std::clamp(sub, 1, side);
      const int offset = (side - sub) / 2;
      std::vector<int> pos;
      pos.reserve(static_cast<std::size_t>(sub) * sub);
      for (int row = offset; row < offset + sub; ++row)
        for (int col = offset; col < offset + sub; ++col) pos.push_back(row * side + col);
      SiteSet s = parent.subset(pos);
      s.design = Design::Regular;
      s.n_side = sub;
      s.requested_count = want;
      s.exact_count = (sub * sub == want);
      out.push_back(std::move(s));
    }
    return out;
  }

  // Max-norm distance from the centre; the m closest sites are exactly the
  // sites inside the smallest centred square holding m of them.
  std::vector<int> order(parent.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> cheb(parent.size());
  for (std::size_t i = 0; i < parent.size(); ++i)
    cheb[i] = std::max(std::abs(parent[i].x - 0.5), std::abs(parent[i].y - 0.5));
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cheb[a] < cheb[b]; });

  for (int want : sizes) {
    auto m = static_cast<std::size_t>(want);
    // Sites tied with the last one lie on the same square boundary and are
    // included too, so the subset stays a true sub-square.
    while (m < order.size() && cheb[order[m]] == cheb[order[m - 1]]) ++m;
    std::vector<int> pos(order.begin(), order.begin() + static_cast<long>(m));
    std::sort(pos.begin(), pos.end());
    SiteSet s = parent.subset(pos);
    s.requested_count = want;
    s.exact_count = (static_cast<int>(m) == want);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::vector<int> nearest(const SiteSet& sites, double x, double y, int k, long self) {
  const Site q{x, y, -1};
  std::vector<std::pair<double, int>> cand;
  cand.reserve(sites.size());
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (static_cast<long>(j) == self) continue;
    const double d2 = dist2(q, sites[j]);
    if (self < 0 && d2 == 0.0) continue;
    cand.emplace_back(d2, static_cast<int>(j));
  }
  if (cand.size() < static_cast<std::size_t>(k)) throw ValidationError("k too large");
  std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
  std::vector<int> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = cand[static_cast<std::size_t>(i)].second;
  return out;
}

}  // namespace

NeighborIndex knn(const SiteSet& sites, int k) {
  const auto n = static_cast<long>(sites.size());
  if (k < 1) throw ValidationError("k: must be at least 1");
  if (k >= n) throw ValidationError("k too large");
  NeighborIndex idx;
  idx.k = k;
  idx.table.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto row = nearest(sites, sites[static_cast<std::size_t>(i)].x, sites[static_cast<std::size_t>(i)].y, k, i);
    std::copy(row.begin(), row.end(), idx.table.begin() + i * k);
  }
  return idx;
}

std::vector<int> knn_query(const SiteSet& sites, double x, double y, int k) {
  if (k < 1) throw ValidationError("k: must be at least 1");
  return nearest(sites, x, y, k, -1);
}

double mean_nearest_neighbor_distance(const SiteSet& sites) {
  const auto nn = knn(sites, 1);
  double total = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i) total += std::sqrt(dist2(sites[i], sites[nn.row(i)[0]]));
  return total / static_cast<double>(sites.size());
}

}  // namespace semisar
