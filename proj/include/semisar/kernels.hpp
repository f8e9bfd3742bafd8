#pragma once

#include <cmath>
#include <span>
#include <string>

#include "semisar/grid.hpp"

namespace semisar {

/// Kernels supported on [0,1].
///
/// TruncatedLinear, K(u) = 1 - u/2, is strictly positive with slope -1/2 on
/// the whole support, so it meets the strict positivity and strict decrease
/// conditions the consistency results rely on. Epanechnikov (0.75(1-u^2))
/// has zero slope at u=0 and vanishes at u=1; Uniform is flat. Both are kept
/// as alternatives.
enum class KernelKind { TruncatedLinear, Epanechnikov, Uniform };

std::string to_string(KernelKind k);
KernelKind parse_kernel(const std::string& name);

/// Throws ValidationError("invalid kernel argument") for negative or non-finite u.
double kernel_eval(KernelKind kind, double u);

/// Unchecked hot-path version for u >= 0.
inline double kernel_value(KernelKind kind, double u) noexcept {
  if (u > 1.0) return 0.0;
  switch (kind) {
    case KernelKind::TruncatedLinear: return 1.0 - 0.5 * u;
    case KernelKind::Epanechnikov: return 0.75 * (1.0 - u * u);
    case KernelKind::Uniform: return 1.0;
  }
  return 0.0;
}

/// Sample median; even lengths average the two middle order statistics.
double median(std::span<const double> v);

/// |median(t1) - median(t2)|
double median_distance(std::span<const double> t1, std::span<const double> t2);

/// Euclidean distance of unit-square coordinates.
inline double scaled_geo_distance(const Site& a, const Site& b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace semisar
