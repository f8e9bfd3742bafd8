#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "oracle.hpp"
#include "semisar/estimator.hpp"
#include "semisar/grid.hpp"

namespace testing {

inline semisar::SiteSet make_sites(const std::vector<oracle::Pt>& pts) {
  semisar::SiteSet s;
  s.design = semisar::Design::Irregular;
  for (std::size_t i = 0; i < pts.size(); ++i) s.sites.push_back({pts[i].x, pts[i].y, static_cast<long>(i)});
  return s;
}

inline std::vector<oracle::Pt> to_pts(const semisar::SiteSet& s) {
  std::vector<oracle::Pt> out;
  for (const auto& site : s.sites) out.push_back({site.x, site.y});
  return out;
}

inline std::vector<oracle::Pt> random_pts(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<oracle::Pt> pts;
  for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
  return pts;
}

inline oracle::Vec to_vec(const Eigen::VectorXd& v) { return oracle::Vec(v.data(), v.data() + v.size()); }

inline oracle::Mat to_mat(const Eigen::MatrixXd& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = z(rng);
  return m;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n) { return random_matrix(rng, n, 1).col(0); }

inline semisar::Observations make_obs(const semisar::SiteSet& sites, Eigen::VectorXd Y, Eigen::MatrixXd X) {
  semisar::Observations o;
  o.sites = sites;
  o.Y = std::move(Y);
  o.X = std::move(X);
  for (Eigen::Index j = 0; j < o.X.cols(); ++j) o.covariate_names.push_back("X" + std::to_string(j + 1));
  return o;
}

inline double max_abs_diff(const oracle::Vec& a, const oracle::Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const oracle::Mat& a, const oracle::Mat& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, max_abs_diff(a[i], b[i]));
  return m;
}

}  // namespace testing
