#pragma once

#include "tlbm/rational.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace tlbm {

/// Integer lattice speeds p_2 < p_4 < ... < p_{q-1} of a symmetric odd-q model.
///
/// Velocities are v_{2j} = v_2 * p_{2j} / p_2, so every population hops a whole
/// number of nodes per step once the node spacing is v_2 / p_2.
class RatioTuple {
public:
  RatioTuple() = default;

  /// Build from the full list of lattice speeds (p_2, p_4, ...). The list is
  /// divided by its gcd so that the entries are relatively prime.
  static RatioTuple from_lattice_speeds(int q, std::vector<long long> speeds) {
    if (q < 3 || q % 2 == 0) {
      throw InvalidArgument("velocity count q must be odd and >= 3, got " + std::to_string(q));
    }
    const auto pairs = static_cast<std::size_t>((q - 1) / 2);
    if (speeds.size() != pairs) {
      throw InvalidArgument("q=" + std::to_string(q) + " needs " + std::to_string(pairs) +
                            " lattice speeds, got " + std::to_string(speeds.size()));
    }
    long long g = 0;
    for (std::size_t j = 0; j < speeds.size(); ++j) {
      if (speeds[j] <= 0) {
        throw InvalidArgument("lattice speeds must be positive");
      }
      if (j > 0 && speeds[j] <= speeds[j - 1]) {
        throw InvalidArgument("lattice speeds must be strictly increasing (repeated speeds make A singular)");
      }
      g = std::gcd(g, speeds[j]);
    }
    for (auto& s : speeds) {
      s /= g;
    }
    RatioTuple t;
    t.q_ = q;
    t.speeds_ = std::move(speeds);
    return t;
  }

  /// Build from the integer ratios pbar_4, pbar_6, ... relative to p_2 = 1.
  static RatioTuple from_ratios(int q, const std::vector<long long>& ratios) {
    std::vector<long long> speeds{1};
    for (long long r : ratios) {
      if (r <= 1) {
        throw InvalidArgument("velocity ratios must exceed 1, got " + std::to_string(r));
      }
      speeds.push_back(r);
    }
    return from_lattice_speeds(q, std::move(speeds));
  }

  /// Build from rational ratios pbar_4, pbar_6, ... (each > 1); speeds are scaled to integers.
  static RatioTuple from_rational_ratios(int q, const std::vector<Rational>& ratios) {
    BigInt scale = 1;
    for (const auto& r : ratios) {
      if (r <= 1) {
        throw InvalidArgument("velocity ratios must exceed 1, got " + r.str());
      }
      const BigInt d = boost::multiprecision::denominator(r);
      scale = scale / boost::multiprecision::gcd(scale, d) * d;
    }
    std::vector<long long> speeds{scale.convert_to<long long>()};
    for (const auto& r : ratios) {
      const Rational scaled = r * Rational(scale);
      speeds.push_back(boost::multiprecision::numerator(scaled).convert_to<long long>());
    }
    return from_lattice_speeds(q, std::move(speeds));
  }

  [[nodiscard]] int q() const noexcept { return q_; }

  /// Number of positive velocities, [q/2].
  [[nodiscard]] std::size_t pairs() const noexcept { return speeds_.size(); }

  [[nodiscard]] const std::vector<long long>& lattice_speeds() const noexcept { return speeds_; }

  [[nodiscard]] long long max_speed() const noexcept { return speeds_.back(); }

  /// pbar_{2(j+1)} = p_{2(j+1)} / p_2 for j = 0 .. pairs()-1 (pbar_2 = 1).
  [[nodiscard]] Rational ratio(std::size_t j) const { return Rational(speeds_.at(j)) / speeds_.front(); }

  [[nodiscard]] std::vector<Rational> ratios() const {
    std::vector<Rational> out;
    out.reserve(pairs());
    for (std::size_t j = 0; j < pairs(); ++j) {
      out.push_back(ratio(j));
    }
    return out;
  }

  friend bool operator==(const RatioTuple&, const RatioTuple&) = default;

private:
  int q_ = 3;
  std::vector<long long> speeds_{1};
};

/// A solved 1-D model M^1|q.
///
/// Only the non-negative velocities are stored: index 0 is v_1 = 0, index j >= 1
/// is v_{2j} = v_2 * pbar_{2j}. Negative partners share the weight.
struct VelocityModel {
  RatioTuple ratios;
  double v2 = 0.0;
  /// w-bar = w / sqrt(pi) for v_1, v_2, v_4, ...
  std::vector<double> normalized_weights;
  /// Per non-negative velocity; the negative partner inherits the flag.
  std::vector<bool> ghosts;
  bool all_positive = true;
  /// Max relative residual of the full moment system after solving.
  double residual = 0.0;
  bool valid = true;
  /// Set when v_2^2 is rational; the weights are then exact rationals as well.
  std::optional<Rational> exact_v2_squared;
  std::vector<Rational> exact_normalized_weights;

  [[nodiscard]] int q() const noexcept { return ratios.q(); }

  /// Speed of non-negative velocity j (j = 0 is the rest velocity).
  [[nodiscard]] double speed(std::size_t j) const {
    return j == 0 ? 0.0 : v2 * to_double(ratios.ratio(j - 1));
  }

  /// All q velocities in the order v_1 = 0, v_2, v_3 = -v_2, v_4, v_5 = -v_4, ...
  [[nodiscard]] std::vector<double> velocities() const {
    std::vector<double> v{0.0};
    for (std::size_t j = 1; j <= ratios.pairs(); ++j) {
      const double s = speed(j);
      v.push_back(s);
      v.push_back(-s);
    }
    return v;
  }

  /// Integer node shift per step for each of the q velocities, same order as velocities().
  [[nodiscard]] std::vector<long long> shifts() const {
    std::vector<long long> s{0};
    for (long long p : ratios.lattice_speeds()) {
      s.push_back(p);
      s.push_back(-p);
    }
    return s;
  }

  /// Normalized weights expanded to all q velocities.
  [[nodiscard]] std::vector<double> full_normalized_weights() const {
    std::vector<double> w{normalized_weights.at(0)};
    for (std::size_t j = 1; j < normalized_weights.size(); ++j) {
      w.push_back(normalized_weights[j]);
      w.push_back(normalized_weights[j]);
    }
    return w;
  }

  /// Raw weights w_i = sqrt(pi) * w-bar_i for all q velocities.
  [[nodiscard]] std::vector<double> weights() const {
    auto w = full_normalized_weights();
    for (double& x : w) {
      x *= std::sqrt(std::numbers::pi);
    }
    return w;
  }

  [[nodiscard]] bool has_ghosts() const {
    for (bool g : ghosts) {
      if (g) {
        return true;
      }
    }
    return false;
  }
};

}  // namespace tlbm
