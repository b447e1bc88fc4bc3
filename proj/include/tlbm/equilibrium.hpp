#pragma once

// Truncated Taylor (TE) and Hermite-equivalent (HE) expansions of the 1-D
// Maxwell-Boltzmann density, and the discretized equilibria built from them.
//
// With t = theta - theta0 the unit-density MB density is
//   pi^{-1/2} (theta0 + t)^{-1/2} exp(-(v-u)^2 / (theta0 + t))
//     = pi^{-1/2} theta0^{-1/2} exp(-v^2/theta0) (1+x)^{-1/2} exp(E),  x = t/theta0,
//   E = v^2/theta0 (1 - 1/(1+x)) + (2uv - u^2)/theta0 / (1+x).
// E has no constant term, so exp(E) truncates after finitely many powers. TE
// counts u and t as order 1; HE counts u as order 1 and t = eps sigma^2 as order 2.

#include "tlbm/moments.hpp"
#include "tlbm/rational.hpp"
#include "tlbm/velocity_model.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace tlbm {

enum class ExpansionKind { Taylor, Hermite };

inline std::string to_string(ExpansionKind k) { return k == ExpansionKind::Taylor ? "TE" : "HE"; }

inline ExpansionKind parse_expansion_kind(const std::string& s) {
  if (s == "TE" || s == "te" || s == "taylor") {
    return ExpansionKind::Taylor;
  }
  if (s == "HE" || s == "he" || s == "hermite") {
    return ExpansionKind::Hermite;
  }
  throw InvalidArgument("unknown expansion kind '" + s + "' (expected TE or HE)");
}

struct ExpansionSpec {
  ExpansionKind kind = ExpansionKind::Taylor;
  int order = 2;
  /// Reference temperature of the Taylor expansion. The Hermite expansion is always about 1.
  Rational theta0 = 1;

  /// Order counted for one power of t = theta - theta0.
  [[nodiscard]] int temperature_weight() const noexcept { return kind == ExpansionKind::Taylor ? 1 : 2; }

  void validate() const {
    if (order < 1) {
      throw InvalidArgument("expansion order must be >= 1");
    }
    if (theta0 <= 0) {
      throw InvalidArgument("reference temperature must be positive");
    }
    if (kind == ExpansionKind::Hermite && theta0 != 1) {
      throw InvalidArgument("the Hermite expansion is taken about theta = 1");
    }
  }
};

/// Exponents of v, u and t in one monomial.
using Monomial = std::array<unsigned, 3>;

/// Exact-coefficient polynomial in (v, u, t).
///
/// At unit density f_E(v) = pi^{-1/2} theta0^{-1/2} exp(-v^2/theta0) P(v; u, t). For
/// theta0 = 1 the discrete equilibrium is f_i = rho w-bar_i P(v_i).
class EquilibriumPolynomial {
public:
  EquilibriumPolynomial() = default;
  EquilibriumPolynomial(ExpansionSpec spec, std::map<Monomial, Rational> terms)
      : spec_(std::move(spec)), terms_(std::move(terms)) {}

  [[nodiscard]] const ExpansionSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] ExpansionKind kind() const noexcept { return spec_.kind; }
  [[nodiscard]] int order() const noexcept { return spec_.order; }
  [[nodiscard]] const std::map<Monomial, Rational>& terms() const noexcept { return terms_; }

  [[nodiscard]] Rational coefficient(unsigned v_power, unsigned u_power, unsigned t_power) const {
    const auto it = terms_.find({v_power, u_power, t_power});
    return it == terms_.end() ? Rational(0) : it->second;
  }

  [[nodiscard]] unsigned v_degree() const {
    unsigned d = 0;
    for (const auto& [m, c] : terms_) {
      d = std::max(d, m[0]);
    }
    return d;
  }

  /// P(v; u, t) in double precision.
  [[nodiscard]] double evaluate(double v, double u, double t) const {
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
      sum += to_double(c) * std::pow(v, m[0]) * std::pow(u, m[1]) * std::pow(t, m[2]);
    }
    return sum;
  }

  /// Coefficient of u^a t^b, itself a polynomial in v, evaluated at v.
  [[nodiscard]] double coefficient_at(unsigned u_power, unsigned t_power, double v) const {
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
      if (m[1] == u_power && m[2] == t_power) {
        sum += to_double(c) * std::pow(v, m[0]);
      }
    }
    return sum;
  }

  /// CSV rows v_power,u_power,t_power,numerator,denominator,kind,N ordered by (v, u, t).
  void write_csv(std::ostream& os, bool header = true) const {
    if (header) {
      os << "v_power,u_power,t_power,numerator,denominator,kind,N\n";
    }
    for (const auto& [m, c] : terms_) {
      os << m[0] << ',' << m[1] << ',' << m[2] << ',' << boost::multiprecision::numerator(c) << ','
         << boost::multiprecision::denominator(c) << ',' << to_string(spec_.kind) << ',' << spec_.order << '\n';
    }
  }

private:
  ExpansionSpec spec_;
  std::map<Monomial, Rational> terms_;
};

namespace detail {

/// Truncated multivariate series in (v, u, t); truncation acts on u and t only.
class Series {
public:
  Series(int order, int t_weight) : order_(order), t_weight_(t_weight) {}

  [[nodiscard]] bool keeps(const Monomial& m) const {
    return static_cast<int>(m[1]) + t_weight_ * static_cast<int>(m[2]) <= order_;
  }

  void add(const Monomial& m, const Rational& c) {
    if (c == 0 || !keeps(m)) {
      return;
    }
    auto& slot = terms_[m];
    slot += c;
    if (slot == 0) {
      terms_.erase(m);
    }
  }

  [[nodiscard]] Series operator*(const Series& other) const {
    Series out(order_, t_weight_);
    for (const auto& [a, ca] : terms_) {
      for (const auto& [b, cb] : other.terms_) {
        out.add({a[0] + b[0], a[1] + b[1], a[2] + b[2]}, ca * cb);
      }
    }
    return out;
  }

  [[nodiscard]] Series operator+(const Series& other) const {
    Series out = *this;
    for (const auto& [m, c] : other.terms_) {
      out.add(m, c);
    }
    return out;
  }

  [[nodiscard]] Series scaled(const Rational& s) const {
    Series out(order_, t_weight_);
    for (const auto& [m, c] : terms_) {
      out.add(m, c * s);
    }
    return out;
  }

  [[nodiscard]] bool empty() const noexcept { return terms_.empty(); }
  [[nodiscard]] const std::map<Monomial, Rational>& terms() const noexcept { return terms_; }

private:
  int order_;
  int t_weight_;
  std::map<Monomial, Rational> terms_;
};

/// sum_k coefficient(k) x^k for a series x without constant term.
template <typename Coefficient>
Series compose(const Series& x, int order, int t_weight, Coefficient coefficient) {
  Series result(order, t_weight);
  result.add({0, 0, 0}, coefficient(0));
  Series power(order, t_weight);
  power.add({0, 0, 0}, 1);
  for (int k = 1; k <= order; ++k) {
    power = power * x;
    if (power.empty()) {
      break;
    }
    result = result + power.scaled(coefficient(k));
  }
  return result;
}

/// Generalized binomial coefficient C(-1/2, k).
inline Rational binomial_minus_half(int k) {
  Rational c = 1;
  for (int j = 0; j < k; ++j) {
    c *= (Rational(-1, 2) - j) / (j + 1);
  }
  return c;
}

}  // namespace detail

/// Builds the TE or HE polynomial described by spec.
inline EquilibriumPolynomial expand(const ExpansionSpec& spec) {
  spec.validate();
  using detail::Series;
  const int n = spec.order;
  const int tw = spec.temperature_weight();
  const Rational inv_theta0 = 1 / spec.theta0;

  Series x(n, tw);  // t / theta0
  x.add({0, 0, 1}, inv_theta0);

  const Series reciprocal = detail::compose(x, n, tw, [](int k) { return Rational(k % 2 == 0 ? 1 : -1); });
  const Series inv_sqrt = detail::compose(x, n, tw, [](int k) { return detail::binomial_minus_half(k); });

  Series one_minus_reciprocal(n, tw);
  one_minus_reciprocal.add({0, 0, 0}, 1);
  one_minus_reciprocal = one_minus_reciprocal + reciprocal.scaled(-1);

  Series v_squared(n, tw);
  v_squared.add({2, 0, 0}, inv_theta0);
  Series drift(n, tw);
  drift.add({1, 1, 0}, 2 * inv_theta0);
  drift.add({0, 2, 0}, -inv_theta0);

  const Series exponent = v_squared * one_minus_reciprocal + drift * reciprocal;
  const Series exp_series = detail::compose(exponent, n, tw, [](int k) { return 1 / factorial(static_cast<unsigned>(k)); });
  const Series p = inv_sqrt * exp_series;
  return {spec, p.terms()};
}

inline EquilibriumPolynomial expand_te(int order, const Rational& theta0 = 1) {
  return expand({ExpansionKind::Taylor, order, theta0});
}

inline EquilibriumPolynomial expand_he(int order) { return expand({ExpansionKind::Hermite, order, 1}); }

/// Highest moment order reproduced exactly: min(N, q+2-2N) for TE, min(N, q+2-N) for HE.
/// A negative value means the order is too high for the lattice.
inline int moment_accuracy(int q, const ExpansionSpec& spec) {
  const int n = spec.order;
  const int lattice = spec.kind == ExpansionKind::Taylor ? q + 2 - 2 * n : q + 2 - n;
  return std::min(n, lattice);
}

inline int moment_accuracy(const VelocityModel& model, const ExpansionSpec& spec) {
  return moment_accuracy(model.q(), spec);
}

/// Per-velocity coefficient table: f_i = rho w-bar_i sum_{a,b} c_{i,a,b} u^a t^b.
///
/// The v-dependence is folded in once so the per-node cost is a small double polynomial.
class CompiledEquilibrium {
public:
  CompiledEquilibrium(const VelocityModel& model, const EquilibriumPolynomial& poly) {
    if (poly.spec().theta0 != 1) {
      throw InvalidArgument("discrete equilibria need an expansion about theta0 = 1");
    }
    theta0_ = 1.0;
    const auto v = model.velocities();
    weights_ = model.full_normalized_weights();
    for (const auto& [m, c] : poly.terms()) {
      max_u_ = std::max(max_u_, m[1]);
      max_t_ = std::max(max_t_, m[2]);
    }
    stride_ = static_cast<std::size_t>(max_u_ + 1) * (max_t_ + 1);
    table_.assign(v.size() * stride_, 0.0);
    for (const auto& [m, c] : poly.terms()) {
      const double cd = to_double(c);
      for (std::size_t i = 0; i < v.size(); ++i) {
        table_[i * stride_ + m[1] * (max_t_ + 1) + m[2]] += cd * std::pow(v[i], m[0]);
      }
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }

  /// Writes f_i^eq for all q velocities into out.
  void evaluate(double rho, double u, double theta, std::span<double> out) const {
    const double t = theta - theta0_;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      const double* row = &table_[i * stride_];
      double acc_u = 0.0;
      for (int a = static_cast<int>(max_u_); a >= 0; --a) {
        double acc_t = 0.0;
        for (int b = static_cast<int>(max_t_); b >= 0; --b) {
          acc_t = acc_t * t + row[static_cast<std::size_t>(a) * (max_t_ + 1) + static_cast<std::size_t>(b)];
        }
        acc_u = acc_u * u + acc_t;
      }
      out[i] = rho * weights_[i] * acc_u;
    }
  }

private:
  double theta0_ = 1.0;
  std::vector<double> weights_;
  std::vector<double> table_;
  unsigned max_u_ = 0;
  unsigned max_t_ = 0;
  std::size_t stride_ = 1;
};

/// f_i^eq = rho w-bar_i P(v_i; u, theta - 1) for all q velocities, ordered like VelocityModel::velocities().
inline std::vector<double> evaluate_feq(const VelocityModel& model, const EquilibriumPolynomial& poly, double rho,
                                        double u, double theta) {
  if (!(theta > 0.0)) {
    throw InvalidArgument("evaluate_feq: temperature must be positive");
  }
  if (rho < 0.0) {
    throw InvalidArgument("evaluate_feq: density must be non-negative");
  }
  const CompiledEquilibrium compiled(model, poly);
  std::vector<double> f(compiled.size());
  compiled.evaluate(rho, u, theta, f);
  return f;
}

/// Analytic MB moment truncated with the same order rule as the expansion.
///
/// rho sum_k C(m,k) U^{m-k} (theta0 + t)^{k/2} Gamma((k+1)/2)/sqrt(pi), expanded in (U, t)
/// and cut at U-order + weight * t-order <= N.
inline double mb_moment_truncated(unsigned m, double rho, double velocity, double theta, const ExpansionSpec& spec) {
  const double theta0 = to_double(spec.theta0);
  const double t = theta - theta0;
  const int tw = spec.temperature_weight();
  double sum = 0.0;
  for (unsigned k = 0; k <= m; k += 2) {
    const double central = to_double(gaussian_moment(k).coefficient * binomial(m, k));
    const unsigned half = k / 2;
    const auto u_order = static_cast<int>(m - k);
    for (unsigned j = 0; j <= half; ++j) {
      if (u_order + tw * static_cast<int>(j) > spec.order) {
        continue;
      }
      sum += central * to_double(binomial(half, j)) * std::pow(theta0, static_cast<double>(half - j)) *
             std::pow(velocity, static_cast<double>(m - k)) * std::pow(t, static_cast<double>(j));
    }
  }
  return rho * sum;
}

struct MomentSample {
  unsigned m = 0;
  double rho = 1.0;
  double u = 0.0;
  double theta = 1.0;
  double discrete = 0.0;
  double analytic = 0.0;
  double error = 0.0;
};

struct MomentRanges {
  std::vector<double> rho{1.0};
  std::vector<double> u{-0.2, 0.0, 0.2};
  std::vector<double> theta{0.8, 1.0, 1.2};
  /// Highest moment checked; negative means use moment_accuracy().
  int max_moment = -1;
  double tolerance = 1e-10;
};

struct MomentReport {
  int m_max = 0;
  double max_abs_error = 0.0;
  bool pass = true;
  std::vector<MomentSample> samples;
};

/// Compares sum_i v_i^m f_i^eq against the truncated analytic moment for m <= m_max over the sample grid.
inline MomentReport verify_moments(const VelocityModel& model, const EquilibriumPolynomial& poly,
                                   const MomentRanges& ranges = {}) {
  MomentReport report;
  report.m_max = ranges.max_moment >= 0 ? ranges.max_moment : moment_accuracy(model, poly.spec());
  const CompiledEquilibrium compiled(model, poly);
  const auto v = model.velocities();
  std::vector<double> f(compiled.size());
  for (double rho : ranges.rho) {
    for (double u : ranges.u) {
      for (double theta : ranges.theta) {
        compiled.evaluate(rho, u, theta, f);
        for (int m = 0; m <= report.m_max; ++m) {
          MomentSample s{static_cast<unsigned>(m), rho, u, theta, 0.0, 0.0, 0.0};
          for (std::size_t i = 0; i < v.size(); ++i) {
            s.discrete += std::pow(v[i], m) * f[i];
          }
          s.analytic = mb_moment_truncated(s.m, rho, u, theta, poly.spec());
          s.error = std::abs(s.discrete - s.analytic);
          report.max_abs_error = std::max(report.max_abs_error, s.error);
          report.samples.push_back(s);
        }
      }
    }
  }
  report.pass = report.max_abs_error < ranges.tolerance;
  return report;
}

}  // namespace tlbm
