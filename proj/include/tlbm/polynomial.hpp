#pragma once

// Exact univariate polynomials over the rationals, Sturm sequences and
// isolation of positive real roots.

#include "tlbm/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace tlbm {

/// Polynomial with exact rational coefficients, lowest power first.
class Polynomial {
public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> coefficients) : c_(std::move(coefficients)) { trim(); }

  [[nodiscard]] const std::vector<Rational>& coefficients() const noexcept { return c_; }
  [[nodiscard]] bool is_zero() const noexcept { return c_.empty(); }
  /// Degree; -1 for the zero polynomial.
  [[nodiscard]] int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  [[nodiscard]] const Rational& leading() const { return c_.back(); }
  [[nodiscard]] Rational coefficient(std::size_t k) const { return k < c_.size() ? c_[k] : Rational(0); }

  template <typename T>
  [[nodiscard]] T evaluate(const T& x) const {
    T acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      acc = acc * x + convert<T>(*it);
    }
    return acc;
  }

  [[nodiscard]] Polynomial derivative() const {
    std::vector<Rational> d;
    for (std::size_t k = 1; k < c_.size(); ++k) {
      d.push_back(c_[k] * static_cast<long long>(k));
    }
    return Polynomial(std::move(d));
  }

  /// Remainder of *this divided by divisor.
  [[nodiscard]] Polynomial remainder(const Polynomial& divisor) const { return divide(divisor).second; }

  /// (quotient, remainder).
  [[nodiscard]] std::pair<Polynomial, Polynomial> divide(const Polynomial& divisor) const {
    if (divisor.is_zero()) {
      throw InvalidArgument("polynomial division by zero");
    }
    std::vector<Rational> rem = c_;
    const int dd = divisor.degree();
    std::vector<Rational> quot(c_.size() >= divisor.c_.size() ? c_.size() - divisor.c_.size() + 1 : 0);
    for (int k = static_cast<int>(rem.size()) - 1; k >= dd; --k) {
      if (rem[static_cast<std::size_t>(k)] == 0) {
        continue;
      }
      const Rational factor = rem[static_cast<std::size_t>(k)] / divisor.leading();
      quot[static_cast<std::size_t>(k - dd)] = factor;
      for (int i = 0; i <= dd; ++i) {
        rem[static_cast<std::size_t>(k - dd + i)] -= factor * divisor.c_[static_cast<std::size_t>(i)];
      }
    }
    return {Polynomial(std::move(quot)), Polynomial(std::move(rem))};
  }

  /// Scaled by a positive constant so the leading coefficient has magnitude 1.
  [[nodiscard]] Polynomial sign_normalized() const {
    if (is_zero()) {
      return *this;
    }
    const Rational scale = abs(leading());
    std::vector<Rational> out = c_;
    for (auto& x : out) {
      x /= scale;
    }
    return Polynomial(std::move(out));
  }

  /// Scaled to relatively prime integer coefficients with a positive leading coefficient.
  [[nodiscard]] Polynomial primitive() const {
    if (is_zero()) {
      return *this;
    }
    BigInt lcm_den = 1;
    for (const auto& x : c_) {
      const BigInt d = boost::multiprecision::denominator(x);
      lcm_den = lcm_den / boost::multiprecision::gcd(lcm_den, d) * d;
    }
    BigInt g = 0;
    std::vector<BigInt> ints;
    for (const auto& x : c_) {
      BigInt v = boost::multiprecision::numerator(x) * (lcm_den / boost::multiprecision::denominator(x));
      g = boost::multiprecision::gcd(g, v);
      ints.push_back(std::move(v));
    }
    if (leading() < 0) {
      g = -g;
    }
    std::vector<Rational> out;
    for (auto& v : ints) {
      out.emplace_back(v / g);
    }
    return Polynomial(std::move(out));
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
  template <typename T>
  static T convert(const Rational& r) {
    if constexpr (std::is_same_v<T, Rational>) {
      return r;
    } else if constexpr (std::is_same_v<T, double>) {
      return to_double(r);
    } else {
      return T(boost::multiprecision::numerator(r)) / T(boost::multiprecision::denominator(r));
    }
  }

  void trim() {
    while (!c_.empty() && c_.back() == 0) {
      c_.pop_back();
    }
  }

  std::vector<Rational> c_;
};

inline Polynomial polynomial_gcd(Polynomial a, Polynomial b) {
  while (!b.is_zero()) {
    Polynomial r = a.remainder(b);
    a = std::move(b);
    b = r.sign_normalized();
  }
  return a.sign_normalized();
}

/// p / gcd(p, p'): same roots, all simple.
inline Polynomial square_free_part(const Polynomial& p) {
  if (p.degree() <= 0) {
    return p;
  }
  const Polynomial g = polynomial_gcd(p, p.derivative());
  if (g.degree() <= 0) {
    return p;
  }
  return p.divide(g).first;
}

/// Sturm chain p, p', -rem(p, p'), ... with each member rescaled by a positive constant.
class SturmSequence {
public:
  explicit SturmSequence(const Polynomial& p) {
    if (p.is_zero()) {
      return;
    }
    chain_.push_back(p.sign_normalized());
    Polynomial next = p.derivative().sign_normalized();
    while (!next.is_zero()) {
      chain_.push_back(next);
      const Polynomial& a = chain_[chain_.size() - 2];
      const Polynomial& b = chain_.back();
      Polynomial r = a.remainder(b);
      std::vector<Rational> neg = r.coefficients();
      for (auto& x : neg) {
        x = -x;
      }
      next = Polynomial(std::move(neg)).sign_normalized();
    }
  }

  /// Sign variations of the chain at x (zeros skipped).
  [[nodiscard]] int variations(const Rational& x) const {
    int count = 0;
    int last = 0;
    for (const auto& p : chain_) {
      const Rational v = p.evaluate(x);
      const int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
      if (s == 0) {
        continue;
      }
      if (last != 0 && s != last) {
        ++count;
      }
      last = s;
    }
    return count;
  }

  /// Number of distinct real roots in (a, b].
  [[nodiscard]] int count(const Rational& a, const Rational& b) const { return variations(a) - variations(b); }

private:
  std::vector<Polynomial> chain_;
};

/// Cauchy bound: every root satisfies |x| < bound.
inline Rational root_bound(const Polynomial& p) {
  Rational m = 0;
  for (int k = 0; k < p.degree(); ++k) {
    m = std::max(m, Rational(abs(p.coefficient(static_cast<std::size_t>(k)) / p.leading())));
  }
  return m + 1;
}

/// Half-open interval (lower, upper] holding exactly one root of a square-free polynomial.
struct RootInterval {
  Rational lower;
  Rational upper;
};

/// Isolating intervals for the distinct positive real roots of p, ascending.
inline std::vector<RootInterval> isolate_positive_roots(const Polynomial& p) {
  std::vector<RootInterval> out;
  if (p.degree() <= 0) {
    return out;
  }
  // Strip roots at zero so that 0 is a regular point of the chain.
  std::vector<Rational> c = p.coefficients();
  std::size_t zeros = 0;
  while (zeros < c.size() && c[zeros] == 0) {
    ++zeros;
  }
  Polynomial reduced(std::vector<Rational>(c.begin() + static_cast<std::ptrdiff_t>(zeros), c.end()));
  reduced = square_free_part(reduced);
  if (reduced.degree() <= 0) {
    return out;
  }
  const SturmSequence sturm(reduced);
  std::vector<RootInterval> pending{{Rational(0), root_bound(reduced)}};
  while (!pending.empty()) {
    RootInterval iv = pending.back();
    pending.pop_back();
    const int n = sturm.count(iv.lower, iv.upper);
    if (n == 0) {
      continue;
    }
    if (n == 1) {
      out.push_back(iv);
      continue;
    }
    const Rational mid = (iv.lower + iv.upper) / 2;
    pending.push_back({mid, iv.upper});
    pending.push_back({iv.lower, mid});
  }
  std::sort(out.begin(), out.end(), [](const RootInterval& a, const RootInterval& b) { return a.lower < b.lower; });
  return out;
}

/// Narrows an isolating interval by exact bisection, then polishes with Newton in 50-digit arithmetic.
///
/// The polynomial must be square-free on the interval so its sign changes across the root.
inline Wide refine_root(const Polynomial& p, RootInterval iv, int bisections = 64) {
  if (p.evaluate(iv.upper) == 0) {
    return to_wide(iv.upper);
  }
  auto sign = [&](const Rational& x) {
    const Rational v = p.evaluate(x);
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
  };
  const int upper_sign = sign(iv.upper);
  for (int k = 0; k < bisections; ++k) {
    const Rational mid = (iv.lower + iv.upper) / 2;
    const int s = sign(mid);
    if (s == 0) {
      return to_wide(mid);
    }
    if (s == upper_sign) {
      iv.upper = mid;
    } else {
      iv.lower = mid;
    }
  }
  const Polynomial dp = p.derivative();
  const Wide lo = to_wide(iv.lower);
  const Wide hi = to_wide(iv.upper);
  Wide x = (lo + hi) / 2;
  for (int k = 0; k < 200; ++k) {
    const Wide fx = p.evaluate(x);
    const Wide dfx = dp.evaluate(x);
    if (dfx == 0) {
      break;
    }
    const Wide next = x - fx / dfx;
    if (next <= lo || next > hi) {
      break;
    }
    const Wide step = abs(next - x);
    x = next;
    if (step <= abs(x) * Wide("1e-45")) {
      break;
    }
  }
  return x;
}

/// A rational root of p close to x, if one exists with denominator below max_denominator.
///
/// Walks the continued-fraction convergents of x and tests each one exactly.
inline std::optional<Rational> rational_root_near(const Polynomial& p, const Wide& x,
                                                  const BigInt& max_denominator = BigInt(1000000000000LL)) {
  BigInt h_prev = 1;
  BigInt h_prev2 = 0;
  BigInt k_prev = 0;
  BigInt k_prev2 = 1;
  Wide rest = x;
  for (int it = 0; it < 64; ++it) {
    const Wide whole = floor(rest);
    const BigInt a = whole.convert_to<BigInt>();
    const BigInt h = a * h_prev + h_prev2;
    const BigInt k = a * k_prev + k_prev2;
    if (k > max_denominator) {
      break;
    }
    const Rational candidate(h, k);
    if (p.evaluate(candidate) == 0) {
      return candidate;
    }
    h_prev2 = h_prev;
    h_prev = h;
    k_prev2 = k_prev;
    k_prev = k;
    const Wide frac = rest - whole;
    if (frac == 0) {
      break;
    }
    rest = 1 / frac;
  }
  return std::nullopt;
}

}  // namespace tlbm
