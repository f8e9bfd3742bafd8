#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace semisar {

enum class Design { Regular, Irregular, Clustered };

std::string to_string(Design d);
Design parse_design(const std::string& name);

/// A sampling location in the unit square. `index` is a stable identifier
/// (the site_id column); positions inside a SiteSet are separate.
struct Site {
  double x = 0.0;
  double y = 0.0;
  long index = 0;
};

struct SiteSet {
  std::vector<Site> sites;
  Design design = Design::Irregular;
  int n_side = 0;  // regular lattices only

  // Populated by nested_subsamples.
  int requested_count = 0;
  bool exact_count = true;

  std::size_t size() const noexcept { return sites.size(); }
  const Site& operator[](std::size_t i) const { return sites[i]; }

  /// Subset by positions, preserving site identifiers.
  SiteSet subset(std::span<const int> positions) const;
};

/// k nearest neighbours of every site, self excluded. Row i holds positions
/// into the SiteSet, ascending by distance with ties broken by position.
struct NeighborIndex {
  int k = 0;
  std::vector<int> table;  // row-major, size() * k

  std::size_t rows() const noexcept { return k == 0 ? 0 : table.size() / static_cast<std::size_t>(k); }
  std::span<const int> row(std::size_t i) const {
    return {table.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
  }
};

SiteSet generate_sites(Design design, int count, std::uint64_t seed);

/// Nested centred sub-squares of `parent`, one per requested size (ascending).
/// Lattice parents yield exact sub-lattices; scattered designs take the sites
/// closest to the centre in the max-norm, which is also a centred square.
std::vector<SiteSet> nested_subsamples(const SiteSet& parent, std::span<const int> sizes);

NeighborIndex knn(const SiteSet& sites, int k);

/// k nearest sites to an arbitrary point. Sites coinciding with the point are
/// skipped, matching the self-exclusion rule for predictions at observed sites.
std::vector<int> knn_query(const SiteSet& sites, double x, double y, int k);

double mean_nearest_neighbor_distance(const SiteSet& sites);

}  // namespace semisar
