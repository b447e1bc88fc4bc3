#pragma once

// Derivation of symmetric odd-q discrete velocity models from integer speed ratios.
//
// The even-moment system is A w = Gamma(s) with A_{kj} = pbar_j^{2k} (k = 1..K)
// and Gamma_k = Gamma((2k+1)/2) / (2 s^k), s = v_2^2. The row n = q+1 closes it:
// pbar^{q+1} A^{-1} Gamma(s) = Gamma((q+2)/2) / (2 s^{K+1}). Every Gamma value is a
// rational multiple of sqrt(pi), so after dividing by sqrt(pi) and multiplying by
// s^{K+1} this is an integer polynomial of degree K in s.

#include "tlbm/moments.hpp"
#include "tlbm/polynomial.hpp"
#include "tlbm/rational.hpp"
#include "tlbm/velocity_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace tlbm {

inline constexpr double kDefaultGhostThreshold = 1e-4;
inline constexpr double kResidualTolerance = 1e-8;

using RationalMatrix = std::vector<std::vector<Rational>>;

/// Exact inverse by Gauss-Jordan elimination with pivot search.
inline RationalMatrix invert(RationalMatrix a) {
  const std::size_t n = a.size();
  RationalMatrix inv(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    inv[i][i] = 1;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) {
      ++pivot;
    }
    if (pivot == n) {
      throw InvalidArgument("singular moment matrix");
    }
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    const Rational d = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col] == 0) {
        continue;
      }
      const Rational f = a[row][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[row][j] -= f * a[col][j];
        inv[row][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

/// Exact ingredients of the reduced equation for one ratio tuple.
struct MomentSystem {
  RatioTuple ratios;
  /// A_{kj} = pbar_j^{2k}, k, j = 1..K.
  RationalMatrix matrix;
  RationalMatrix inverse;
  /// gamma[k-1] = Gamma((2k+1)/2) / (2 sqrt(pi)) for k = 1..K+1.
  std::vector<Rational> gamma;
  /// Integer-coefficient polynomial in s = v_2^2.
  Polynomial polynomial;
  /// The same polynomial before clearing denominators: (LHS - RHS) s^{K+1} / sqrt(pi).
  Polynomial raw;

  /// LHS - RHS of the reduced equation at base speed v2, divided by sqrt(pi).
  [[nodiscard]] double equation_residual(double v2) const {
    const double s = v2 * v2;
    return raw.evaluate(s) / std::pow(s, static_cast<double>(matrix.size() + 1));
  }

  /// Normalized pair weights w-bar_{2j} = sum_k inverse_{jk} gamma_k s^{-k}, evaluated at s.
  [[nodiscard]] std::vector<Wide> pair_weights(const Wide& s) const {
    const std::size_t n = matrix.size();
    std::vector<Wide> w(n, Wide(0));
    for (std::size_t j = 0; j < n; ++j) {
      Wide inv_s_pow = 1;
      for (std::size_t k = 0; k < n; ++k) {
        inv_s_pow /= s;
        w[j] += to_wide(inverse[j][k] * gamma[k]) * inv_s_pow;
      }
    }
    return w;
  }
};

inline MomentSystem build_moment_system(const RatioTuple& ratios) {
  const std::size_t n = ratios.pairs();
  MomentSystem sys;
  sys.ratios = ratios;
  sys.matrix.assign(n, std::vector<Rational>(n));
  const auto pbar = ratios.ratios();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      sys.matrix[k][j] = rational_pow(pbar[j], static_cast<unsigned>(2 * (k + 1)));
    }
  }
  sys.inverse = invert(sys.matrix);
  for (std::size_t k = 1; k <= n + 1; ++k) {
    sys.gamma.push_back(gaussian_moment(static_cast<unsigned>(2 * k)).coefficient / 2);
  }
  // b = pbar^{q+1} A^{-1}
  const auto top = static_cast<unsigned>(ratios.q() + 1);
  std::vector<Rational> b(n, Rational(0));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      b[k] += rational_pow(pbar[j], top) * sys.inverse[j][k];
    }
  }
  // sum_k b_k gamma_k s^{K+1-k} - gamma_{K+1}
  std::vector<Rational> coeffs(n + 1, Rational(0));
  coeffs[0] = -sys.gamma[n];
  for (std::size_t k = 1; k <= n; ++k) {
    coeffs[n + 1 - k] += b[k - 1] * sys.gamma[k - 1];
  }
  sys.raw = Polynomial(std::move(coeffs));
  sys.polynomial = sys.raw.primitive();
  return sys;
}

/// Integer polynomial in s = v_2^2 whose positive roots give the admissible base speeds.
inline Polynomial build_polynomial(const RatioTuple& ratios) { return build_moment_system(ratios).polynomial; }

/// Velocities with |w-bar| below threshold; a threshold of 0 flags nothing.
inline std::vector<bool> detect_ghosts(const VelocityModel& model, double threshold = kDefaultGhostThreshold) {
  std::vector<bool> flags;
  flags.reserve(model.normalized_weights.size());
  for (double w : model.normalized_weights) {
    flags.push_back(std::abs(w) < threshold);
  }
  return flags;
}

/// Max relative deviation of Xi(n) from Gamma((n+1)/2) over even n <= q+1, in 50-digit arithmetic.
inline double moment_residual(const RatioTuple& ratios, const Wide& v2, const Wide& w_rest,
                              const std::vector<Wide>& pair_weights) {
  double worst = 0.0;
  const auto pbar = ratios.ratios();
  for (unsigned n = 0; n <= static_cast<unsigned>(ratios.q() + 1); n += 2) {
    Wide xi = n == 0 ? w_rest : Wide(0);
    for (std::size_t j = 0; j < pair_weights.size(); ++j) {
      xi += 2 * pair_weights[j] * pow(v2 * to_wide(pbar[j]), n);
    }
    const Wide target = to_wide(gaussian_moment(n).coefficient);
    worst = std::max(worst, static_cast<double>(abs(xi - target) / target));
  }
  return worst;
}

inline VelocityModel make_model(const MomentSystem& sys, const Wide& s, double ghost_threshold) {
  VelocityModel m;
  m.ratios = sys.ratios;
  const Wide v2 = sqrt(s);
  m.v2 = static_cast<double>(v2);
  const auto pairs = sys.pair_weights(s);
  Wide rest = 1;
  for (const auto& w : pairs) {
    rest -= 2 * w;
  }
  m.normalized_weights.push_back(static_cast<double>(rest));
  for (const auto& w : pairs) {
    m.normalized_weights.push_back(static_cast<double>(w));
  }
  m.residual = moment_residual(sys.ratios, v2, rest, pairs);
  m.valid = m.residual <= kResidualTolerance;
  m.all_positive = std::all_of(m.normalized_weights.begin(), m.normalized_weights.end(), [](double w) { return w > 0; });
  m.ghosts = detect_ghosts(m, ghost_threshold);
  if (const auto exact = rational_root_near(sys.polynomial, s)) {
    m.exact_v2_squared = *exact;
    Rational rest_exact = 1;
    std::vector<Rational> pair_exact(sys.matrix.size(), Rational(0));
    for (std::size_t j = 0; j < pair_exact.size(); ++j) {
      Rational inv_s_pow = 1;
      for (std::size_t k = 0; k < pair_exact.size(); ++k) {
        inv_s_pow /= *exact;
        pair_exact[j] += sys.inverse[j][k] * sys.gamma[k] * inv_s_pow;
      }
      rest_exact -= 2 * pair_exact[j];
    }
    m.exact_normalized_weights.push_back(rest_exact);
    m.exact_normalized_weights.insert(m.exact_normalized_weights.end(), pair_exact.begin(), pair_exact.end());
  }
  return m;
}

/// Every model for the ratio tuple, one per positive root of the reduced polynomial, sorted by v_2.
inline std::vector<VelocityModel> solve_model(const RatioTuple& ratios, double ghost_threshold = kDefaultGhostThreshold) {
  const MomentSystem sys = build_moment_system(ratios);
  const Polynomial simple = square_free_part(sys.polynomial);
  std::vector<VelocityModel> out;
  for (const auto& iv : isolate_positive_roots(simple)) {
    out.push_back(make_model(sys, refine_root(simple, iv), ghost_threshold));
  }
  std::sort(out.begin(), out.end(), [](const VelocityModel& a, const VelocityModel& b) { return a.v2 < b.v2; });
  return out;
}

/// One branch of the closed-form q = 5 family.
struct ClosedFormBranch {
  double v2 = 0.0;
  double w_rest = 0.0;
  double w2 = 0.0;
  double w4 = 0.0;
};

/// Both branches of the q = 5 family with r = p_2 / p_4: index 0 takes -chi, index 1 takes +chi.
///
/// v_2 = sqrt(3 + 3r^2 -+ chi) / 2, chi = sqrt(9r^4 - 42r^2 + 9). The +chi branch tends to
/// the q = 3 model as r -> 0 with a vanishing outer weight.
inline std::array<ClosedFormBranch, 2> closed_form_q5_values(double r) {
  if (!(r > 0.0 && r < 1.0)) {
    throw InvalidArgument("closed_form_q5: r must lie in (0, 1)");
  }
  const double r2 = r * r;
  const double disc = 9 * r2 * r2 - 42 * r2 + 9;
  if (disc < 0) {
    throw NumericalFailure("closed_form_q5: 9r^4 - 42r^2 + 9 < 0, no real solution");
  }
  const double chi = std::sqrt(disc);
  std::array<ClosedFormBranch, 2> out{};
  for (int b = 0; b < 2; ++b) {
    const double sg = b == 0 ? -1.0 : 1.0;
    ClosedFormBranch& br = out[static_cast<std::size_t>(b)];
    br.v2 = std::sqrt(3 + 3 * r2 + sg * chi) / 2;
    br.w2 = (9 * r2 * r2 - 27 * r2 - 6 - sg * (3 * r2 - 2) * chi) / (300 * r2 * (r2 - 1));
    br.w4 = (6 * r2 * r2 + 27 * r2 - 9 - sg * (2 * r2 - 3) * chi) / (300 * (r2 - 1));
    br.w_rest = 1 - 2 * (br.w2 + br.w4);
  }
  return out;
}

/// Closed-form q = 5 models for rational r = p_2 / p_4 in (0, 1), ordered like closed_form_q5_values.
inline std::array<VelocityModel, 2> closed_form_q5(const Rational& r, double ghost_threshold = kDefaultGhostThreshold) {
  if (r <= 0 || r >= 1) {
    throw InvalidArgument("closed_form_q5: r must lie in (0, 1)");
  }
  const RatioTuple ratios = RatioTuple::from_lattice_speeds(
      5, {boost::multiprecision::numerator(r).convert_to<long long>(),
          boost::multiprecision::denominator(r).convert_to<long long>()});
  const auto values = closed_form_q5_values(to_double(r));
  std::array<VelocityModel, 2> out;
  for (std::size_t b = 0; b < 2; ++b) {
    VelocityModel& m = out[b];
    m.ratios = ratios;
    m.v2 = values[b].v2;
    m.normalized_weights = {values[b].w_rest, values[b].w2, values[b].w4};
    m.all_positive = values[b].w_rest > 0 && values[b].w2 > 0 && values[b].w4 > 0;
    m.ghosts = detect_ghosts(m, ghost_threshold);
  }
  return out;
}

/// D-fold tensor product of a 1-D model.
struct MultiDimModel {
  int dimension = 1;
  /// velocities[i][d] for d < dimension.
  std::vector<std::vector<double>> velocities;
  /// Raw weights (product of 1-D w_i), summing to pi^(D/2).
  std::vector<double> weights;

  /// sum_i w_i prod_d v_{i,d}^{exponents[d]}.
  [[nodiscard]] double moment(const std::vector<unsigned>& exponents) const {
    if (exponents.size() != static_cast<std::size_t>(dimension)) {
      throw InvalidArgument("moment: exponent count must equal the dimension");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      double term = weights[i];
      for (std::size_t d = 0; d < exponents.size(); ++d) {
        term *= std::pow(velocities[i][d], static_cast<double>(exponents[d]));
      }
      sum += term;
    }
    return sum;
  }
};

inline MultiDimModel tensor_product_model(const VelocityModel& model, int dimension) {
  if (dimension < 1 || dimension > 3) {
    throw InvalidArgument("tensor_product_model: dimension must be 1, 2 or 3");
  }
  const auto v = model.velocities();
  const auto w = model.weights();
  MultiDimModel out;
  out.dimension = dimension;
  out.velocities = {{}};
  out.weights = {1.0};
  for (int d = 0; d < dimension; ++d) {
    std::vector<std::vector<double>> vel;
    std::vector<double> wt;
    for (std::size_t a = 0; a < out.weights.size(); ++a) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        auto row = out.velocities[a];
        row.push_back(v[i]);
        vel.push_back(std::move(row));
        wt.push_back(out.weights[a] * w[i]);
      }
    }
    out.velocities = std::move(vel);
    out.weights = std::move(wt);
  }
  return out;
}

}  // namespace tlbm
