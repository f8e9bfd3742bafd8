#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "semisar/errors.hpp"
#include "semisar/evaluation.hpp"
#include "semisar/selection.hpp"
#include "semisar/simgen.hpp"

using namespace semisar;

namespace {

Observations random_obs(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  const auto pts = testing::random_pts(rng, n);
  const Eigen::MatrixXd X = testing::random_matrix(rng, n, 2);
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) Y(i) = X(i, 0) - 0.5 * X(i, 1) + std::sin(6 * pts[static_cast<std::size_t>(i)].x);
  Y += 0.1 * testing::random_vector(rng, n);
  return testing::make_obs(testing::make_sites(pts), Y, X);
}

// Independent fold loop built from the public fit/predict calls.
double fold_loop(const Observations& data, const BandwidthConfig& cfg, int folds, std::uint64_t seed) {
  const auto label = fold_assignment(static_cast<std::size_t>(data.n()), folds, seed);
  double ss = 0.0;
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train, held;
    for (int i = 0; i < data.n(); ++i) (label[static_cast<std::size_t>(i)] == f ? held : train).push_back(i);
    const SpatialDataset d = SpatialDataset::build(data.subset(train), cfg.k);
    const FitResult fr = fit(d, cfg);
    for (int i : held) {
      const double pred = predict(data.X.row(i).transpose(), data.sites[static_cast<std::size_t>(i)], d, fr);
      ss += (pred - data.Y(i)) * (pred - data.Y(i));
    }
  }
  return std::sqrt(ss / static_cast<double>(data.n()));
}

}  // namespace

TEST_CASE("rmse") {
  const std::vector<double> a = {1, 2, 3, 4};
  std::vector<double> b = a;
  CHECK(rmse(a, b) == 0.0);
  for (auto& v : b) v += 1.0;
  CHECK(rmse(b, a) == 1.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> x(7), y(7);
  double ss = 0;
  for (int i = 0; i < 7; ++i) {
    x[static_cast<std::size_t>(i)] = z(rng);
    y[static_cast<std::size_t>(i)] = z(rng);
    ss += (x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)]) * (x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)]);
  }
  CHECK(rmse(x, y) == doctest::Approx(std::sqrt(ss / 7)).epsilon(1e-15));
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(rmse(a, std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("fold assignment is balanced and seeded") {
  const auto a = fold_assignment(23, 5, 9), b = fold_assignment(23, 5, 9), c = fold_assignment(23, 5, 10);
  CHECK(a == b);
  CHECK(a != c);
  std::vector<int> counts(5, 0);
  for (int f : a) ++counts[static_cast<std::size_t>(f)];
  for (int cnt : counts) CHECK((cnt == 4 || cnt == 5));
}

TEST_CASE("search space normalisation and validation") {
  SearchSpace s = SearchSpace::defaults(WeightVariant::K2ME);
  CHECK(s.h1_set == std::vector<double>{0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0});
  CHECK(s.k_set == std::vector<int>{4, 8, 12});
  CHECK(s.folds == 5);
  CHECK(s.configs().size() == 7 * 7 * 3);
  s.h1_set = {0.5, 0.1, 0.5};
  s.normalize();
  CHECK(s.h1_set == std::vector<double>{0.1, 0.5});
  s.h2_set = {-1.0};
  CHECK_THROWS_WITH_AS(s.normalize(), doctest::Contains("h2"), ValidationError);
  SearchSpace k1s = SearchSpace::defaults(WeightVariant::K1S);
  CHECK(k1s.configs().size() == 7 * 3);
  for (const auto& c : k1s.configs()) CHECK(c.h2 == 0.05);
  SearchSpace f = SearchSpace::defaults(WeightVariant::K1ME);
  f.folds = 1;
  CHECK_THROWS_WITH_AS(f.validate(), doctest::Contains("folds"), ValidationError);
}

TEST_CASE("single configuration: score equals a direct fold loop") {
  const Observations data = random_obs(2, 60);
  SearchSpace s;
  s.variant = WeightVariant::K2ME;
  s.h1_set = {0.3};
  s.h2_set = {0.8};
  s.k_set = {4};
  const SelectionResult r = cv_select(data, s, 77);
  REQUIRE(r.score_table.size() == 1);
  CHECK(r.best == s.configs()[0]);
  const double expect = fold_loop(data, r.best, 5, 77);
  CHECK(std::fabs(r.best_score - expect) < 1e-12);
  CHECK(std::fabs(cv_score(data, r.best, 5, false, 77, {}) - expect) < 1e-12);
}

TEST_CASE("every score table entry is reproducible on its own") {
  const Observations data = random_obs(3, 50);
  SearchSpace s;
  s.variant = WeightVariant::K1M;
  s.h1_set = {0.1, 0.5};
  s.k_set = {4, 8};
  s.h2_set = {1.0};
  const SelectionResult r = cv_select(data, s, 5);
  CHECK(r.score_table.size() == 4);
  for (const auto& e : r.score_table) CHECK(std::fabs(e.cv_rmse - fold_loop(data, e.cfg, 5, 5)) < 1e-12);
  const SelectionResult again = cv_select(data, s, 5);
  CHECK(again.best == r.best);
  for (std::size_t i = 0; i < r.score_table.size(); ++i) CHECK(again.score_table[i].cv_rmse == r.score_table[i].cv_rmse);
}

TEST_CASE("a dominated candidate never wins and duplicates change nothing") {
  const Observations data = random_obs(4, 60);
  SearchSpace s;
  s.variant = WeightVariant::K1S;
  s.h1_set = {0.05, 0.4};
  s.h2_set = {1.0};
  s.k_set = {4};
  const SelectionResult r = cv_select(data, s, 1);
  double worst = 0;
  for (const auto& e : r.score_table) worst = std::max(worst, e.cv_rmse);
  CHECK(r.best_score < worst);
  SearchSpace dup = s;
  dup.h1_set.push_back(r.best.h1);
  CHECK(cv_select(data, dup, 1).best == r.best);
}

TEST_CASE("ties go to the smaller k, then h2, then h1") {
  // Constant covariate-free signal: with uniform kernels and huge bandwidths
  // every configuration with the same k gives the same score.
  const Observations data = random_obs(5, 40);
  SearchSpace s;
  s.variant = WeightVariant::K1ME;
  s.kernel1 = s.kernel2 = KernelKind::Uniform;
  s.h1_set = {1.0};
  s.h2_set = {1e6, 2e6};
  s.k_set = {4};
  const SelectionResult r = cv_select(data, s, 3);
  CHECK(r.ties == 2);
  CHECK(r.best.h2 == 1e6);
}

TEST_CASE("loo scoring uses one full fit") {
  const Observations data = random_obs(6, 40);
  const BandwidthConfig cfg{WeightVariant::K2ME, 0.4, 0.8, 4};
  const SpatialDataset d = SpatialDataset::build(data, 4);
  const FitResult fr = fit(d, cfg);
  const double expect = rmse(fitted_values(d, fr), d.Y());
  CHECK(std::fabs(cv_score(data, cfg, 5, true, 0, {}) - expect) < 1e-14);
  SearchSpace s;
  s.variant = WeightVariant::K2ME;
  s.h1_set = {0.4};
  s.h2_set = {0.8};
  s.k_set = {4};
  s.loo = true;
  CHECK(std::fabs(cv_select(data, s, 0).best_score - expect) < 1e-14);
}

TEST_CASE("infeasible everywhere reports no feasible configuration") {
  const Observations data = random_obs(7, 30);
  SearchSpace s;
  s.variant = WeightVariant::K1S;
  s.h1_set = {1e-6};
  s.h2_set = {1.0};
  s.k_set = {4};
  CHECK_THROWS_WITH_AS(cv_select(data, s, 1, {true}), doctest::Contains("no feasible configuration"), NumericalError);
  CHECK_NOTHROW(cv_select(data, s, 1, {false}));
}

TEST_CASE("data too small for the folds") {
  const Observations data = random_obs(8, 10);
  SearchSpace s = SearchSpace::defaults(WeightVariant::K2ME);
  CHECK_THROWS_WITH_AS(cv_select(data, s, 1), doctest::Contains("data too small"), ValidationError);
}

TEST_CASE("strong spatial dependence avoids a flat spatial component") {
  SimConfig sc;
  sc.n = 100;
  sc.rho = 0.9;
  const Simulator sim(sc);
  SearchSpace s;
  s.variant = WeightVariant::K1ME;
  s.h1_set = {0.1, 0.3, 0.5};
  s.h2_set = {0.3, 1.0, 1000.0};
  s.k_set = {4, 8};
  int not_largest = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const SimulatedData d = sim.draw(static_cast<std::uint64_t>(rep));
    const StandardizedSplit st = standardize(d.obs, d.obs);
    const SelectionResult r = cv_select(st.train, s, static_cast<std::uint64_t>(rep));
    if (r.best.h2 < 1000.0) ++not_largest;
  }
  MESSAGE("h2 below the largest candidate in " << not_largest << " of 20");
  CHECK(not_largest >= 18);
}
