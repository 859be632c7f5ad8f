#pragma once

#include <algorithm>
#include <cmath>

namespace mpe {

inline constexpr double kPi = 3.14159265358979323846;

inline double clip(double x, double lo, double hi) {
  return std::min(hi, std::max(lo, x));
}

// Standard normal density.
inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

// Standard normal CDF via erfc; accurate in both tails.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

// Numerically stable logistic sigmoid.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Composite Simpson rule on [lo, hi] with an even interval count.
template <typename F>
double simpson(F&& f, double lo, double hi, int intervals) {
  if (intervals < 2 || intervals % 2 != 0) intervals += intervals % 2 + 2;
  const double h = (hi - lo) / intervals;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) {
    acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

}  // namespace mpe
