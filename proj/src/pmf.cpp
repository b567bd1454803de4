#include "vpon/pmf.hpp"

#include <cmath>
#include <string>

namespace vpon {

double SizePmf::mass() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

double SizePmf::mean() const {
  double s = 0.0;
  for (std::size_t k = 1; k < p.size(); ++k) s += static_cast<double>(k) * p[k];
  return s;
}

double SizePmf::second_moment() const {
  double s = 0.0;
  for (std::size_t k = 1; k < p.size(); ++k) {
    double kk = static_cast<double>(k);
    s += kk * kk * p[k];
  }
  return s;
}

double SizePmf::variance() const {
  double m = mean();
  double v = second_moment() - m * m;
  return v < 0.0 ? 0.0 : v;  // clip tiny negative round-off
}

void SizePmf::check_valid(double tol) const {
  if (p.empty()) throw ParameterError("size pmf: empty support");
  if (segment_bytes <= 0) throw ParameterError("size pmf: segment_bytes must be positive");
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!(p[k] >= 0.0) || !std::isfinite(p[k]))
      throw ParameterError("size pmf: negative or non-finite entry at " + std::to_string(k));
  }
  if (std::abs(mass() - 1.0) > tol)
    throw ParameterError("size pmf: mass " + std::to_string(mass()) + " outside tolerance");
}

SizePmf delta_pmf(int k, int segment_bytes) {
  if (k < 0) throw ParameterError("delta pmf: negative segment count");
  SizePmf out;
  out.segment_bytes = segment_bytes;
  out.p.assign(static_cast<std::size_t>(k) + 1, 0.0);
  out.p[static_cast<std::size_t>(k)] = 1.0;
  return out;
}

}  // namespace vpon
