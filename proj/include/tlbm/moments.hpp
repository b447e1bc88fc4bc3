#pragma once

// Exact Gaussian moments, Maxwell-Boltzmann raw moments and discrete moment sums.

#include "tlbm/rational.hpp"
#include "tlbm/velocity_model.hpp"

#include <cmath>
#include <numbers>

namespace tlbm {

inline const double kSqrtPi = std::sqrt(std::numbers::pi);

/// coefficient * sqrt(pi), with the coefficient kept exact.
struct SqrtPiRational {
  Rational coefficient;

  [[nodiscard]] double value() const { return to_double(coefficient) * kSqrtPi; }

  friend bool operator==(const SqrtPiRational&, const SqrtPiRational&) = default;
};

/// Integral of v^n exp(-v^2) over the real line: 0 for odd n, sqrt(pi) (n-1)!! / 2^(n/2) for even n.
inline SqrtPiRational gaussian_moment(unsigned n) {
  if (n % 2 == 1) {
    return {Rational(0)};
  }
  Rational c = 1;
  for (unsigned k = n; k >= 2; k -= 2) {
    c *= Rational(k - 1, 2);
  }
  return {c};
}

/// m-th raw moment of rho (pi theta)^(-1/2) exp(-(V-U)^2/theta) in the lab-frame velocity V.
///
/// Expands (U + sqrt(theta) w)^m binomially; odd powers of w integrate to zero,
/// so only integer powers of theta survive.
inline double mb_moment(unsigned m, double rho, double velocity, double theta) {
  if (!(rho > 0.0)) {
    throw InvalidArgument("mb_moment: density must be positive");
  }
  if (!(theta > 0.0)) {
    throw InvalidArgument("mb_moment: temperature must be positive");
  }
  double sum = 0.0;
  for (unsigned k = 0; k <= m; k += 2) {
    const double central = to_double(gaussian_moment(k).coefficient);
    sum += to_double(binomial(m, k)) * std::pow(velocity, static_cast<double>(m - k)) *
           std::pow(theta, static_cast<double>(k / 2)) * central;
  }
  return rho * sum;
}

/// Xi(n) = sum_i w_i v_i^n over all q velocities (raw weights, so Xi(0) = sqrt(pi)).
///
/// Partners +-v are summed as a pair first; for odd n each pair cancels exactly.
inline double discrete_moment(const VelocityModel& model, unsigned n) {
  const double exponent = static_cast<double>(n);
  double sum = n == 0 ? model.normalized_weights.at(0) * kSqrtPi : 0.0;
  for (std::size_t j = 1; j < model.normalized_weights.size(); ++j) {
    const double w = model.normalized_weights[j] * kSqrtPi;
    const double v = model.speed(j);
    const double pair = w * std::pow(v, exponent) + w * std::pow(-v, exponent);
    sum += pair;
  }
  return sum;
}

}  // namespace tlbm
