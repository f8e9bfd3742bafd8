#pragma once

// Naive reference implementations used as test oracles. They deliberately
// avoid the library's code paths: plain loops, full sorts, Gaussian
// elimination in long double.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major, Mat[i][j]

struct Pt {
  double x, y;
};

inline double kernel(int kind, double u) {
  // 0 truncated linear, 1 epanechnikov, 2 uniform
  if (u < 0 || u > 1) return 0.0;
  if (kind == 0) return 1.0 - u / 2.0;
  if (kind == 1) return 0.75 * (1.0 - u * u);
  return 1.0;
}

inline double median(Vec v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline double dist(Pt a, Pt b) { return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y)); }

// k nearest among `pts` to q, skipping exact coincidences, ties by index.
inline std::vector<int> nearest(const std::vector<Pt>& pts, Pt q, int k, int skip = -1) {
  std::vector<std::pair<double, int>> d;
  for (int j = 0; j < static_cast<int>(pts.size()); ++j) {
    if (j == skip) continue;
    const double dd = dist(pts[j], q);
    if (skip < 0 && dd == 0.0) continue;
    d.push_back({dd, j});
  }
  std::sort(d.begin(), d.end());
  std::vector<int> out;
  for (int t = 0; t < k; ++t) out.push_back(d[t].second);
  return out;
}

inline Mat neighborhood(const std::vector<Pt>& pts, const Vec& Y, int k) {
  Mat T;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    Vec row;
    for (int j : nearest(pts, pts[i], k, i)) row.push_back(Y[j]);
    T.push_back(row);
  }
  return T;
}

// variant: 0 K1S, 1 K1ME, 2 K2ME, 3 K1M
inline double numerator(int variant, int k1, int k2, double h1, double h2, double geo, double dm) {
  switch (variant) {
    case 0: return kernel(k1, geo / h1);
    case 1: return kernel(k2, dm / h2);
    case 2: return kernel(k1, geo / h1) * kernel(k2, dm / h2);
    default: return kernel(k1, geo * dm / h1);
  }
}

// One weight row for a target with median m0 at point q; `self` is excluded
// (or, when negative, any site coinciding with q).
inline Vec weight_row(const std::vector<Pt>& pts, const Mat& T, Pt q, double m0, int self, int variant, int k1, int k2,
                      double h1, double h2, int k) {
  const int n = static_cast<int>(pts.size());
  Vec w(n, 0.0);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == self || (self < 0 && dist(pts[j], q) == 0.0)) continue;
    w[j] = numerator(variant, k1, k2, h1, h2, dist(pts[j], q), std::fabs(m0 - median(T[j])));
    total += w[j];
  }
  if (total > 0.0) {
    for (auto& v : w) v /= total;
  } else {
    std::fill(w.begin(), w.end(), 0.0);
    for (int j : nearest(pts, q, k, self)) w[j] = 1.0 / k;
  }
  return w;
}

inline Mat weights(const std::vector<Pt>& pts, const Mat& T, int variant, int k1, int k2, double h1, double h2, int k) {
  Mat W;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i)
    W.push_back(weight_row(pts, T, pts[i], median(T[i]), i, variant, k1, k2, h1, h2, k));
  return W;
}

inline Mat matmul(const Mat& A, const Mat& B) {
  Mat C(A.size(), Vec(B[0].size(), 0.0));
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < B[0].size(); ++j)
      for (std::size_t t = 0; t < B.size(); ++t) C[i][j] += A[i][t] * B[t][j];
  return C;
}

inline Vec matvec(const Mat& A, const Vec& x) {
  Vec y(A.size(), 0.0);
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += A[i][j] * x[j];
  return y;
}

inline Mat transpose(const Mat& A) {
  Mat B(A[0].size(), Vec(A.size()));
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < A[0].size(); ++j) B[j][i] = A[i][j];
  return B;
}

// Solves A x = b by Gaussian elimination with partial pivoting in long double.
inline Vec solve(const Mat& A, const Vec& b) {
  const std::size_t n = A.size();
  std::vector<std::vector<long double>> M(n, std::vector<long double>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) M[i][j] = A[i][j];
    M[i][n] = b[i];
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(M[r][c]) > std::fabs(M[piv][c])) piv = r;
    if (M[piv][c] == 0) throw std::runtime_error("oracle: singular system");
    std::swap(M[c], M[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const long double f = M[r][c] / M[c][c];
      for (std::size_t j = c; j <= n; ++j) M[r][j] -= f * M[c][j];
    }
  }
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(M[i][n] / M[i][i]);
  return x;
}

// Explicit inverse by Gauss-Jordan in long double.
inline Mat inverse(const Mat& A) {
  const std::size_t n = A.size();
  Mat inv(n, Vec(n));
  for (std::size_t c = 0; c < n; ++c) {
    Vec e(n, 0.0);
    e[c] = 1.0;
    const Vec col = solve(A, e);
    for (std::size_t r = 0; r < n; ++r) inv[r][c] = col[r];
  }
  return inv;
}

// beta from the normal equations (X'X) b = X'y.
inline Vec least_squares(const Mat& X, const Vec& y) {
  const Mat Xt = transpose(X);
  const Mat XtX = matmul(Xt, X);
  return solve(XtX, matvec(Xt, y));
}

inline double sinc_closed_form(double m1, double m2, double theta, double h) {
  if (h == 0.0) return 1.0;
  return m1 / (m1 + m2) * (theta / h) * std::sin(h / theta);
}

// Full semiparametric pipeline with prediction at q.
struct Pipeline {
  Mat T, W;
  Vec ytilde;
  Mat xtilde;
  Vec beta, r;
  double prediction = 0.0;
};

inline Pipeline pipeline(const std::vector<Pt>& pts, const Vec& Y, const Mat& X, int variant, int k1, int k2, double h1,
                         double h2, int k, Pt q, const Vec& x0) {
  Pipeline o;
  const std::size_t n = pts.size(), p = X[0].size();
  o.T = neighborhood(pts, Y, k);
  o.W = weights(pts, o.T, variant, k1, k2, h1, h2, k);
  const Vec WY = matvec(o.W, Y);
  const Mat WX = matmul(o.W, X);
  o.ytilde.resize(n);
  o.xtilde.assign(n, Vec(p));
  for (std::size_t i = 0; i < n; ++i) {
    o.ytilde[i] = Y[i] - WY[i];
    for (std::size_t j = 0; j < p; ++j) o.xtilde[i][j] = X[i][j] - WX[i][j];
  }
  o.beta = least_squares(o.xtilde, o.ytilde);
  Vec resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    resid[i] = Y[i];
    for (std::size_t j = 0; j < p; ++j) resid[i] -= X[i][j] * o.beta[j];
  }
  o.r = matvec(o.W, resid);
  Vec t0;
  for (int j : nearest(pts, q, k)) t0.push_back(Y[j]);
  const Vec w0 = weight_row(pts, o.T, q, median(t0), -1, variant, k1, k2, h1, h2, k);
  o.prediction = 0.0;
  for (std::size_t j = 0; j < p; ++j) o.prediction += x0[j] * o.beta[j];
  for (std::size_t i = 0; i < n; ++i) o.prediction += w0[i] * resid[i];
  return o;
}

}  // namespace oracle
