#pragma once

// Exact solution of the 1-D ideal-gas Riemann problem.
//
// States are given in the lattice variables (rho, u, theta). The gas pressure is
// rho theta / 2 (the variance of the 1-D Maxwellian is theta/2); the reported
// pressure in profiles and plateau tables is rho theta. The monatomic 1-D gas has
// gamma = 3.

#include "tlbm/rational.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace tlbm {

inline constexpr double kMonatomic1dGamma = 3.0;

struct GasState {
  double rho = 1.0;
  double u = 0.0;
  double theta = 1.0;

  [[nodiscard]] double gas_pressure() const noexcept { return 0.5 * rho * theta; }
  [[nodiscard]] double reported_pressure() const noexcept { return rho * theta; }

  void validate() const {
    if (!(rho > 0.0) || !(theta > 0.0) || !std::isfinite(u)) {
      throw InvalidArgument("gas state needs rho > 0, theta > 0 and finite u");
    }
  }

  static GasState from_pressure(double rho, double u, double gas_pressure) { return {rho, u, 2.0 * gas_pressure / rho}; }

  friend bool operator==(const GasState&, const GasState&) = default;
};

enum class WaveKind { Rarefaction, Shock, None };

inline std::string to_string(WaveKind k) {
  switch (k) {
    case WaveKind::Rarefaction:
      return "rarefaction";
    case WaveKind::Shock:
      return "shock";
    case WaveKind::None:
      return "none";
  }
  return "none";
}

struct RiemannSolution {
  GasState left;
  GasState right;
  double gamma = kMonatomic1dGamma;
  /// Gas pressure (rho theta / 2) in the star region.
  double p_star = 0.0;
  double u_star = 0.0;
  double rho_star_left = 0.0;
  double rho_star_right = 0.0;
  WaveKind left_wave = WaveKind::None;
  WaveKind right_wave = WaveKind::None;
  /// Left family: head and tail of the fan, both equal to the shock speed for a shock.
  double left_head = 0.0;
  double left_tail = 0.0;
  double right_head = 0.0;
  double right_tail = 0.0;
  int iterations = 0;

  [[nodiscard]] double reported_pressure_star() const noexcept { return 2.0 * p_star; }
  [[nodiscard]] GasState star_left() const { return GasState::from_pressure(rho_star_left, u_star, p_star); }
  [[nodiscard]] GasState star_right() const { return GasState::from_pressure(rho_star_right, u_star, p_star); }
};

namespace detail {

inline double sound_speed(double gamma, double rho, double p) { return std::sqrt(gamma * p / rho); }

/// Pressure function of one side and its derivative in p.
inline std::pair<double, double> pressure_function(double p, double rho, double pk, double gamma) {
  const double c = sound_speed(gamma, rho, pk);
  if (p > pk) {
    const double a = 2.0 / ((gamma + 1.0) * rho);
    const double b = (gamma - 1.0) / (gamma + 1.0) * pk;
    const double root = std::sqrt(a / (p + b));
    return {(p - pk) * root, root * (1.0 - 0.5 * (p - pk) / (b + p))};
  }
  const double ratio = p / pk;
  const double f = 2.0 * c / (gamma - 1.0) * (std::pow(ratio, (gamma - 1.0) / (2.0 * gamma)) - 1.0);
  const double df = 1.0 / (rho * c) * std::pow(ratio, -(gamma + 1.0) / (2.0 * gamma));
  return {f, df};
}

}  // namespace detail

/// Star state by Newton iteration on the pressure function, with bisection fallback.
inline RiemannSolution solve_riemann(const GasState& left, const GasState& right, double gamma = kMonatomic1dGamma) {
  left.validate();
  right.validate();
  if (!(gamma > 1.0)) {
    throw InvalidArgument("solve_riemann: gamma must exceed 1");
  }
  RiemannSolution s;
  s.left = left;
  s.right = right;
  s.gamma = gamma;
  const double pl = left.gas_pressure();
  const double pr = right.gas_pressure();
  const double cl = detail::sound_speed(gamma, left.rho, pl);
  const double cr = detail::sound_speed(gamma, right.rho, pr);
  const double du = right.u - left.u;
  if (2.0 / (gamma - 1.0) * (cl + cr) <= du) {
    throw NumericalFailure("solve_riemann: initial states generate a vacuum");
  }

  auto total = [&](double p) {
    const auto [fl, dfl] = detail::pressure_function(p, left.rho, pl, gamma);
    const auto [fr, dfr] = detail::pressure_function(p, right.rho, pr, gamma);
    return std::pair{fl + fr + du, dfl + dfr};
  };

  // Two-rarefaction guess.
  const double z = (gamma - 1.0) / (2.0 * gamma);
  double p = std::pow((cl + cr - 0.5 * (gamma - 1.0) * du) / (cl / std::pow(pl, z) + cr / std::pow(pr, z)), 1.0 / z);
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    const auto [f, df] = total(p);
    double next = p - f / df;
    if (!(next > 0.0) || !std::isfinite(next)) {
      break;
    }
    const double change = std::abs(next - p) / (0.5 * (next + p));
    p = next;
    s.iterations = it + 1;
    if (change < 1e-14) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    double lo = 1e-12;
    double hi = 10.0 * std::max(pl, pr);
    while (total(hi).first < 0.0) {
      hi *= 2.0;
    }
    for (int it = 0; it < 400 && (hi - lo) > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (total(mid).first < 0.0 ? lo : hi) = mid;
    }
    p = 0.5 * (lo + hi);
  }
  s.p_star = p;
  s.u_star = 0.5 * (left.u + right.u) + 0.5 * (detail::pressure_function(p, right.rho, pr, gamma).first -
                                               detail::pressure_function(p, left.rho, pl, gamma).first);

  const double gm = (gamma - 1.0) / (gamma + 1.0);
  if (p == pl && s.u_star == left.u) {
    s.left_wave = WaveKind::None;
    s.rho_star_left = left.rho;
    s.left_head = s.left_tail = left.u - cl;
  } else if (p > pl) {
    s.left_wave = WaveKind::Shock;
    s.rho_star_left = left.rho * ((p / pl + gm) / (gm * p / pl + 1.0));
    const double speed = left.u - cl * std::sqrt((gamma + 1.0) / (2.0 * gamma) * p / pl + (gamma - 1.0) / (2.0 * gamma));
    s.left_head = s.left_tail = speed;
  } else {
    s.left_wave = WaveKind::Rarefaction;
    s.rho_star_left = left.rho * std::pow(p / pl, 1.0 / gamma);
    s.left_head = left.u - cl;
    s.left_tail = s.u_star - detail::sound_speed(gamma, s.rho_star_left, p);
  }
  if (p == pr && s.u_star == right.u) {
    s.right_wave = WaveKind::None;
    s.rho_star_right = right.rho;
    s.right_head = s.right_tail = right.u + cr;
  } else if (p > pr) {
    s.right_wave = WaveKind::Shock;
    s.rho_star_right = right.rho * ((p / pr + gm) / (gm * p / pr + 1.0));
    const double speed = right.u + cr * std::sqrt((gamma + 1.0) / (2.0 * gamma) * p / pr + (gamma - 1.0) / (2.0 * gamma));
    s.right_head = s.right_tail = speed;
  } else {
    s.right_wave = WaveKind::Rarefaction;
    s.rho_star_right = right.rho * std::pow(p / pr, 1.0 / gamma);
    s.right_head = right.u + cr;
    s.right_tail = s.u_star + detail::sound_speed(gamma, s.rho_star_right, p);
  }
  return s;
}

/// Self-similar state at xi = x / t.
inline GasState sample(const RiemannSolution& s, double xi) {
  const double g = s.gamma;
  if (xi <= s.u_star) {
    const GasState& l = s.left;
    if (s.left_wave != WaveKind::Rarefaction) {
      return xi <= s.left_head ? l : s.star_left();
    }
    if (xi <= s.left_head) {
      return l;
    }
    if (xi >= s.left_tail) {
      return s.star_left();
    }
    const double pl = l.gas_pressure();
    const double cl = detail::sound_speed(g, l.rho, pl);
    const double base = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * cl) * (l.u - xi);
    const double rho = l.rho * std::pow(base, 2.0 / (g - 1.0));
    const double u = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * l.u + xi);
    const double p = pl * std::pow(base, 2.0 * g / (g - 1.0));
    return GasState::from_pressure(rho, u, p);
  }
  const GasState& r = s.right;
  if (s.right_wave != WaveKind::Rarefaction) {
    return xi >= s.right_head ? r : s.star_right();
  }
  if (xi >= s.right_head) {
    return r;
  }
  if (xi <= s.right_tail) {
    return s.star_right();
  }
  const double pr = r.gas_pressure();
  const double cr = detail::sound_speed(g, r.rho, pr);
  const double base = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * cr) * (r.u - xi);
  const double rho = r.rho * std::pow(base, 2.0 / (g - 1.0));
  const double u = 2.0 / (g + 1.0) * (-cr + 0.5 * (g - 1.0) * r.u + xi);
  const double p = pr * std::pow(base, 2.0 * g / (g - 1.0));
  return GasState::from_pressure(rho, u, p);
}

/// Largest relative Rankine-Hugoniot (mass, momentum, energy) residual over the shocks of s.
inline double rankine_hugoniot_residual(const RiemannSolution& s) {
  auto residual = [&](const GasState& a, const GasState& b, double speed) {
    const double g = s.gamma;
    auto energy = [g](const GasState& q) { return q.gas_pressure() / (g - 1.0) + 0.5 * q.rho * q.u * q.u; };
    const double mass_a = a.rho * (a.u - speed);
    const double mass_b = b.rho * (b.u - speed);
    const double mom_a = a.rho * a.u * (a.u - speed) + a.gas_pressure();
    const double mom_b = b.rho * b.u * (b.u - speed) + b.gas_pressure();
    const double en_a = energy(a) * (a.u - speed) + a.gas_pressure() * a.u;
    const double en_b = energy(b) * (b.u - speed) + b.gas_pressure() * b.u;
    auto rel = [](double x, double y) { return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300}); };
    return std::max({rel(mass_a, mass_b), rel(mom_a, mom_b), rel(en_a, en_b)});
  };
  double worst = 0.0;
  if (s.left_wave == WaveKind::Shock) {
    worst = std::max(worst, residual(s.left, s.star_left(), s.left_head));
  }
  if (s.right_wave == WaveKind::Shock) {
    worst = std::max(worst, residual(s.star_right(), s.right, s.right_head));
  }
  return worst;
}

/// Largest relative drift of the Riemann invariant and entropy p / rho^gamma across the fans of s.
inline double rarefaction_invariant_residual(const RiemannSolution& s) {
  const double g = s.gamma;
  auto check = [&](const GasState& outer, const GasState& star, double sign) {
    auto invariant = [&](const GasState& q) {
      return q.u + sign * 2.0 / (g - 1.0) * detail::sound_speed(g, q.rho, q.gas_pressure());
    };
    auto entropy = [&](const GasState& q) { return q.gas_pressure() / std::pow(q.rho, g); };
    const double a = invariant(outer);
    const double b = invariant(star);
    const double ea = entropy(outer);
    const double eb = entropy(star);
    return std::max(std::abs(a - b) / std::max(std::abs(a), 1e-300), std::abs(ea - eb) / ea);
  };
  double worst = 0.0;
  if (s.left_wave == WaveKind::Rarefaction) {
    worst = std::max(worst, check(s.left, s.star_left(), 1.0));
  }
  if (s.right_wave == WaveKind::Rarefaction) {
    worst = std::max(worst, check(s.right, s.star_right(), -1.0));
  }
  return worst;
}

}  // namespace tlbm
