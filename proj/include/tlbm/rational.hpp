#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tlbm {

/// Arbitrary-precision rational used for every exact coefficient in the library.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// 50-digit float used where a root or weight has to be polished beyond double.
using Wide = boost::multiprecision::cpp_bin_float_50;

/// Raised for invalid inputs (bad ratio tuples, non-positive temperature, ...).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical problem has no admissible answer (no real root, vacuum).
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Wide to_wide(const Rational& r) {
  return Wide(boost::multiprecision::numerator(r)) / Wide(boost::multiprecision::denominator(r));
}

inline Rational rational_pow(const Rational& base, unsigned exponent) {
  Rational result = 1;
  Rational b = base;
  while (exponent != 0) {
    if ((exponent & 1U) != 0) {
      result *= b;
    }
    b *= b;
    exponent >>= 1U;
  }
  return result;
}

inline Rational factorial(unsigned n) {
  Rational r = 1;
  for (unsigned k = 2; k <= n; ++k) {
    r *= k;
  }
  return r;
}

inline Rational binomial(unsigned n, unsigned k) {
  if (k > n) {
    return 0;
  }
  BigInt r = 1;
  for (unsigned j = 1; j <= k; ++j) {
    r = r * (n - k + j) / j;
  }
  return Rational(r);
}

/// Exact value of a double as a rational (every finite double is a dyadic rational).
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) {
    throw InvalidArgument("rational_from_double: non-finite value");
  }
  int exponent = 0;
  double mantissa = std::frexp(x, &exponent);
  // 53 bits of mantissa as an integer.
  auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r(scaled);
  if (exponent >= 0) {
    r *= rational_pow(Rational(2), static_cast<unsigned>(exponent));
  } else {
    r /= rational_pow(Rational(2), static_cast<unsigned>(-exponent));
  }
  return r;
}

inline std::string to_string(const Rational& r) { return r.str(); }

}  // namespace tlbm
