#include "semisar/kernels.hpp"

#include <algorithm>
#include <vector>

#include "semisar/errors.hpp"

namespace semisar {

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::TruncatedLinear: return "truncated_linear";
    case KernelKind::Epanechnikov: return "epanechnikov";
    case KernelKind::Uniform: return "uniform";
  }
  return "unknown";
}

KernelKind parse_kernel(const std::string& name) {
  if (name == "truncated_linear") return KernelKind::TruncatedLinear;
  if (name == "epanechnikov") return KernelKind::Epanechnikov;
  if (name == "uniform") return KernelKind::Uniform;
  throw ValidationError("kernel: unknown value '" + name + "'");
}

double kernel_eval(KernelKind kind, double u) {
  if (!std::isfinite(u) || u < 0.0) throw ValidationError("invalid kernel argument");
  return kernel_value(kind, u);
}

double median(std::span<const double> v) {
  if (v.empty()) throw ValidationError("median of an empty sequence");
  std::vector<double> w(v.begin(), v.end());
  const std::size_t mid = w.size() / 2;
  std::nth_element(w.begin(), w.begin() + static_cast<long>(mid), w.end());
  const double upper = w[mid];
  if (w.size() % 2 == 1) return upper;
  const double lower = *std::max_element(w.begin(), w.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

double median_distance(std::span<const double> t1, std::span<const double> t2) {
  return std::abs(median(t1) - median(t2));
}

}  // namespace semisar
