#pragma once

// Independent reference computations the tests compare the library against.
// Everything here is written from the definitions, not by calling the code
// under test.

#include <cmath>
#include <functional>
#include <vector>

#include "chlu/phase.hpp"

namespace oracles {

using chlu::Mat;
using chlu::Vec;

// Central difference gradient of a scalar function of a vector.
inline Vec fd_grad(const std::function<double(const Vec&)>& f, const Vec& x,
                   double h_scale = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = h_scale * std::max(1.0, std::abs(x(i)));
    Vec hi = x, lo = x;
    hi(i) += h;
    lo(i) -= h;
    g(i) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

// Duplicate feed-forward evaluation: tanh hidden layers, linear scalar head.
inline double net_value(const std::vector<Mat>& weights, const std::vector<Vec>& biases,
                        const Vec& q) {
  Vec a = q;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Vec z = weights[l] * a + biases[l];
    if (l + 1 < weights.size())
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = std::tanh(z(i));
    a = z;
  }
  return a(0);
}

// T(p) = sqrt(c^2 p^T M^-1 p + m0^2 c^4) from the definition.
inline double kinetic_energy(double c, double m0, const Vec& log_mass, const Vec& p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    s += p(i) * p(i) * std::exp(-log_mass(i));
  return std::sqrt(c * c * s + m0 * m0 * c * c * c * c);
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  return (a - b).lpNorm<Eigen::Infinity>();
}

// Relative on the infinity norm, with a unit floor so near-zero exact values
// do not blow the ratio up.
inline double rel_diff(const Vec& approx, const Vec& exact) {
  const double scale = std::max(1.0, exact.lpNorm<Eigen::Infinity>());
  return max_abs_diff(approx, exact) / scale;
}

} // namespace oracles
