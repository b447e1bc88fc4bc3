#pragma once

// 1-D stream-collide BGK lattice Boltzmann solver for the thermal shock tube.
//
// Lattice units: dt = 1 and dx = v_2 / p_2, so population i hops exactly p_i
// nodes per step. Nodes are numbered X = 1 .. nodes; storage is zero-based.

#include "tlbm/equilibrium.hpp"
#include "tlbm/riemann.hpp"
#include "tlbm/velocity_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace tlbm {

/// Which initial state occupies X < interface.
enum class HighSide { Left, Right };

struct ShockTubeConfig {
  VelocityModel model;
  ExpansionSpec expansion;
  int nodes = 1000;
  /// First node (1-based) of the right-hand state.
  int interface = 500;
  /// rho-bar of the high-density state C_L = {rho-bar, 0, 1}; C_R = {1, 0, 1}.
  double high_density = 3.0;
  HighSide high_side = HighSide::Left;
  double tau = 1.0;
  /// Step count; 0 picks the count at which the fastest shock has crossed 35% of the tube.
  int steps = 0;
  /// Keep a snapshot every this many steps; 0 keeps the final state only.
  int snapshot_interval = 0;
  /// Collision workers; 0 reads TLBM_WORKERS (default 1).
  int workers = 0;

  [[nodiscard]] GasState high_state() const { return {high_density, 0.0, 1.0}; }
  [[nodiscard]] static GasState low_state() { return {1.0, 0.0, 1.0}; }
  [[nodiscard]] GasState state_left_of_interface() const {
    return high_side == HighSide::Left ? high_state() : low_state();
  }
  [[nodiscard]] GasState state_right_of_interface() const {
    return high_side == HighSide::Left ? low_state() : high_state();
  }

  /// Physical length of one lattice spacing.
  [[nodiscard]] double spacing() const {
    return model.v2 / static_cast<double>(model.ratios.lattice_speeds().front());
  }

  void validate() const {
    if (!(high_density > 0.0)) {
      throw InvalidArgument("shock tube: rho-bar must be positive");
    }
    if (!(tau > 0.0)) {
      throw InvalidArgument("shock tube: tau must be positive");
    }
    const long long band = model.ratios.max_speed();
    if (nodes < 4 * band + 2) {
      throw InvalidArgument("shock tube: too few nodes for the boundary bands");
    }
    if (interface <= band || interface > nodes - band) {
      throw InvalidArgument("shock tube: interface must lie between the boundary bands");
    }
    if (steps < 0 || snapshot_interval < 0 || workers < 0) {
      throw InvalidArgument("shock tube: steps, snapshot interval and workers must be non-negative");
    }
    if (model.normalized_weights.size() != model.ratios.pairs() + 1) {
      throw InvalidArgument("shock tube: model weights do not match its ratio tuple");
    }
    expansion.validate();
  }
};

/// Step count at which the fastest shock of the exact solution has moved 35% of the tube length.
inline int default_steps(const ShockTubeConfig& config) {
  const RiemannSolution s = solve_riemann(config.state_left_of_interface(), config.state_right_of_interface());
  double speed = 0.0;
  if (s.left_wave == WaveKind::Shock) {
    speed = std::max(speed, std::abs(s.left_head));
  }
  if (s.right_wave == WaveKind::Shock) {
    speed = std::max(speed, std::abs(s.right_head));
  }
  if (speed == 0.0) {
    speed = std::max(std::abs(s.left_head), std::abs(s.right_head));
  }
  if (speed == 0.0) {
    return 100;
  }
  const double nodes_per_step = speed / config.spacing();
  return std::max(1, static_cast<int>(std::lround(0.35 * config.nodes / nodes_per_step)));
}

inline int resolve_workers(int requested) {
  if (requested > 0) {
    return requested;
  }
  if (const char* env = std::getenv("TLBM_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) {
      return n;
    }
  }
  return 1;
}

/// Macroscopic fields at one time level.
struct Snapshot {
  int step = 0;
  std::vector<double> rho;
  std::vector<double> u;
  std::vector<double> theta;

  [[nodiscard]] std::size_t size() const noexcept { return rho.size(); }
  [[nodiscard]] double pressure(std::size_t x) const { return rho[x] * theta[x]; }
};

/// Populations of every node, stored population-major: f[i * nodes + x].
class LatticeState {
public:
  LatticeState(std::size_t nodes, std::size_t q) : nodes_(nodes), q_(q), f_(nodes * q, 0.0) {
    fields_.rho.assign(nodes, 0.0);
    fields_.u.assign(nodes, 0.0);
    fields_.theta.assign(nodes, 0.0);
  }

  [[nodiscard]] std::size_t nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::size_t q() const noexcept { return q_; }
  [[nodiscard]] int step() const noexcept { return fields_.step; }
  void set_step(int s) noexcept { fields_.step = s; }

  [[nodiscard]] double& f(std::size_t i, std::size_t x) { return f_[i * nodes_ + x]; }
  [[nodiscard]] double f(std::size_t i, std::size_t x) const { return f_[i * nodes_ + x]; }
  [[nodiscard]] std::vector<double>& populations() noexcept { return f_; }
  [[nodiscard]] const std::vector<double>& populations() const noexcept { return f_; }

  [[nodiscard]] const Snapshot& fields() const noexcept { return fields_; }

  /// rho = sum f, rho u = sum v f, rho (u^2 + theta/2) = sum v^2 f, for nodes in [begin, end).
  void recompute_fields(const std::vector<double>& velocities, std::size_t begin, std::size_t end) {
    for (std::size_t x = begin; x < end; ++x) {
      double m0 = 0.0;
      double m1 = 0.0;
      double m2 = 0.0;
      for (std::size_t i = 0; i < q_; ++i) {
        const double fi = f_[i * nodes_ + x];
        m0 += fi;
        m1 += velocities[i] * fi;
        m2 += velocities[i] * velocities[i] * fi;
      }
      const double u = m1 / m0;
      fields_.rho[x] = m0;
      fields_.u[x] = u;
      fields_.theta[x] = 2.0 * (m2 / m0 - u * u);
    }
  }

  void recompute_fields(const std::vector<double>& velocities) { recompute_fields(velocities, 0, nodes_); }

private:
  std::size_t nodes_;
  std::size_t q_;
  std::vector<double> f_;
  Snapshot fields_;
};

enum class FailureMode { None, NonFinite, NonPositiveDensity, RunawayVelocity };

inline std::string to_string(FailureMode m) {
  switch (m) {
    case FailureMode::None:
      return "none";
    case FailureMode::NonFinite:
      return "non-finite";
    case FailureMode::NonPositiveDensity:
      return "non-positive-density";
    case FailureMode::RunawayVelocity:
      return "runaway-velocity";
  }
  return "none";
}

struct StabilityVerdict {
  bool stable = true;
  int failure_step = -1;
  FailureMode failure_mode = FailureMode::None;
  /// Node (1-based) where the failure was first seen.
  int failure_node = -1;
  /// High-frequency density energy of the last healthy state.
  double fluctuation = 0.0;
};

/// Mean squared second difference of the density over the interior, excluding one band at each end.
inline double density_fluctuation(const Snapshot& s, std::size_t band) {
  if (s.size() < 2 * band + 3) {
    return 0.0;
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t x = band + 1; x + band + 1 < s.size(); ++x) {
    const double d2 = s.rho[x + 1] - 2.0 * s.rho[x] + s.rho[x - 1];
    sum += d2 * d2;
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

/// Drives one shock-tube run. Owns the lattice and the compiled equilibrium.
class ShockTube {
public:
  explicit ShockTube(ShockTubeConfig config)
      : config_(validated(std::move(config))),
        poly_(expand(config_.expansion)),
        equilibrium_(config_.model, poly_),
        velocities_(config_.model.velocities()),
        shifts_(config_.model.shifts()),
        band_(static_cast<std::size_t>(config_.model.ratios.max_speed())),
        workers_(resolve_workers(config_.workers)),
        state_(static_cast<std::size_t>(config_.nodes), velocities_.size()),
        scratch_(state_.populations().size(), 0.0) {
    if (config_.steps == 0) {
      config_.steps = default_steps(config_);
    }
    left_eq_.resize(q());
    right_eq_.resize(q());
    const GasState l = config_.state_left_of_interface();
    const GasState r = config_.state_right_of_interface();
    equilibrium_.evaluate(l.rho, l.u, l.theta, left_eq_);
    equilibrium_.evaluate(r.rho, r.u, r.theta, right_eq_);
    initialize();
  }

  [[nodiscard]] const ShockTubeConfig& config() const noexcept { return config_; }
  [[nodiscard]] const LatticeState& state() const noexcept { return state_; }
  [[nodiscard]] LatticeState& state() noexcept { return state_; }
  [[nodiscard]] const EquilibriumPolynomial& polynomial() const noexcept { return poly_; }
  [[nodiscard]] std::size_t band() const noexcept { return band_; }
  [[nodiscard]] std::size_t q() const noexcept { return velocities_.size(); }

  /// Every node at the equilibrium of its side of the interface.
  void initialize() {
    const auto split = static_cast<std::size_t>(config_.interface - 1);
    for (std::size_t x = 0; x < state_.nodes(); ++x) {
      const auto& eq = x < split ? left_eq_ : right_eq_;
      for (std::size_t i = 0; i < q(); ++i) {
        state_.f(i, x) = eq[i];
      }
    }
    state_.set_step(0);
    state_.recompute_fields(velocities_);
  }

  /// BGK relaxation at nodes [begin, end) using the current fields.
  void collide(std::size_t begin, std::size_t end) {
    std::vector<double> feq(q());
    const double omega = 1.0 / config_.tau;
    const Snapshot& fields = state_.fields();
    for (std::size_t x = begin; x < end; ++x) {
      equilibrium_.evaluate(fields.rho[x], fields.u[x], fields.theta[x], feq);
      for (std::size_t i = 0; i < q(); ++i) {
        double& fi = state_.f(i, x);
        fi -= omega * (fi - feq[i]);
      }
    }
  }

  /// Population i moves shifts[i] nodes; vacated end nodes are refilled by apply_boundaries.
  void stream() {
    const std::size_t n = state_.nodes();
    auto& f = state_.populations();
    for (std::size_t i = 0; i < q(); ++i) {
      const long long s = shifts_[i];
      double* dst = scratch_.data() + i * n;
      const double* src = f.data() + i * n;
      const auto a = static_cast<std::size_t>(s < 0 ? -s : s);
      if (s >= 0) {
        std::copy(src, src + (n - a), dst + a);
        std::copy(src, src + a, dst);
      } else {
        std::copy(src + a, src + n, dst);
        std::copy(src + (n - a), src + n, dst + (n - a));
      }
    }
    f.swap(scratch_);
  }

  /// Overwrites the first and last max-speed nodes with the equilibria of the fixed end states.
  void apply_boundaries() {
    const std::size_t n = state_.nodes();
    for (std::size_t k = 0; k < band_; ++k) {
      for (std::size_t i = 0; i < q(); ++i) {
        state_.f(i, k) = left_eq_[i];
        state_.f(i, n - 1 - k) = right_eq_[i];
      }
    }
  }

  /// One collide-stream-boundary cycle followed by a field update.
  void step() {
    parallel_for([this](std::size_t b, std::size_t e) { collide(b, e); });
    stream();
    apply_boundaries();
    parallel_for([this](std::size_t b, std::size_t e) { state_.recompute_fields(velocities_, b, e); });
    state_.set_step(state_.step() + 1);
  }

  /// Health of the current fields; failure_step is left for the caller.
  [[nodiscard]] StabilityVerdict check_health() const {
    StabilityVerdict v;
    const Snapshot& s = state_.fields();
    const double vmax = config_.model.speed(config_.model.ratios.pairs());
    for (std::size_t x = 0; x < s.size(); ++x) {
      FailureMode mode = FailureMode::None;
      if (!std::isfinite(s.rho[x]) || !std::isfinite(s.u[x]) || !std::isfinite(s.theta[x])) {
        mode = FailureMode::NonFinite;
      } else if (s.rho[x] <= 0.0) {
        mode = FailureMode::NonPositiveDensity;
      } else if (std::abs(s.u[x]) > vmax) {
        mode = FailureMode::RunawayVelocity;
      }
      if (mode != FailureMode::None) {
        v.stable = false;
        v.failure_mode = mode;
        v.failure_node = static_cast<int>(x) + 1;
        return v;
      }
    }
    v.fluctuation = density_fluctuation(s, band_);
    return v;
  }

private:
  static ShockTubeConfig validated(ShockTubeConfig c) {
    c.validate();
    return c;
  }

  template <typename Body>
  void parallel_for(Body body) {
    const std::size_t n = state_.nodes();
    const auto w = static_cast<std::size_t>(workers_);
    if (w <= 1) {
      body(0, n);
      return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(w - 1);
    const std::size_t chunk = (n + w - 1) / w;
    for (std::size_t k = 1; k < w; ++k) {
      const std::size_t b = std::min(n, k * chunk);
      const std::size_t e = std::min(n, b + chunk);
      if (b < e) {
        pool.emplace_back([&body, b, e] { body(b, e); });
      }
    }
    body(0, std::min(n, chunk));
  }

  ShockTubeConfig config_;
  EquilibriumPolynomial poly_;
  CompiledEquilibrium equilibrium_;
  std::vector<double> velocities_;
  std::vector<long long> shifts_;
  std::size_t band_;
  int workers_;
  LatticeState state_;
  std::vector<double> scratch_;
  std::vector<double> left_eq_;
  std::vector<double> right_eq_;
};

struct RunResult {
  ShockTubeConfig config;
  std::vector<Snapshot> snapshots;
  StabilityVerdict verdict;

  [[nodiscard]] const Snapshot& final_snapshot() const { return snapshots.back(); }
};

/// Runs config.steps steps, stopping at the first unhealthy state.
inline RunResult run(const ShockTubeConfig& config) {
  ShockTube tube(config);
  RunResult result;
  result.config = tube.config();
  const int steps = result.config.steps;
  const int interval = result.config.snapshot_interval;
  if (interval > 0) {
    result.snapshots.push_back(tube.state().fields());
  }
  StabilityVerdict verdict;
  for (int t = 1; t <= steps; ++t) {
    tube.step();
    verdict = tube.check_health();
    if (!verdict.stable) {
      verdict.failure_step = t;
      break;
    }
    if (interval > 0 && t % interval == 0 && t != steps) {
      result.snapshots.push_back(tube.state().fields());
    }
  }
  result.snapshots.push_back(tube.state().fields());
  if (!verdict.stable) {
    verdict.fluctuation = density_fluctuation(result.snapshots.back(), tube.band());
  }
  result.verdict = verdict;
  return result;
}

struct PlateauValue {
  double at_node = 0.0;
  double median = 0.0;
  /// (max - min) / |median| over the window.
  double spread = 0.0;
};

struct PlateauReport {
  int x1 = 430;
  int x2 = 650;
  int window = 10;
  PlateauValue rho1, rho2, p1, p2, theta1, theta2, u1, u2;
  bool flat = true;
  std::vector<std::string> warnings;
};

/// Field values at probe nodes X1, X2 (1-based) plus the median over +-window nodes; p = rho theta.
inline PlateauReport extract_plateaus(const Snapshot& s, int x1 = 430, int x2 = 650, int window = 10) {
  const auto n = static_cast<int>(s.size());
  if (x1 < 1 || x2 < 1 || x1 > n || x2 > n) {
    throw InvalidArgument("extract_plateaus: probe node outside the lattice");
  }
  PlateauReport r;
  r.x1 = x1;
  r.x2 = x2;
  r.window = window;
  auto probe = [&](int node, const std::string& name, auto field) {
    std::vector<double> values;
    for (int x = std::max(1, node - window); x <= std::min(n, node + window); ++x) {
      values.push_back(field(static_cast<std::size_t>(x - 1)));
    }
    PlateauValue pv;
    pv.at_node = field(static_cast<std::size_t>(node - 1));
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    pv.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    const double scale = std::max(std::abs(pv.median), 1e-12);
    pv.spread = (sorted.back() - sorted.front()) / scale;
    // Velocity plateaus are measured on an O(0.1) scale; use an absolute floor of 1.
    if (name.rfind("u", 0) == 0) {
      pv.spread = (sorted.back() - sorted.front()) / std::max(scale, 1.0);
    }
    if (pv.spread > 0.02) {
      r.flat = false;
      r.warnings.push_back(name + " window spread " + std::to_string(pv.spread) + " exceeds 2%");
    }
    return pv;
  };
  auto rho = [&](std::size_t x) { return s.rho[x]; };
  auto u = [&](std::size_t x) { return s.u[x]; };
  auto theta = [&](std::size_t x) { return s.theta[x]; };
  auto p = [&](std::size_t x) { return s.pressure(x); };
  r.rho1 = probe(x1, "rho1", rho);
  r.rho2 = probe(x2, "rho2", rho);
  r.p1 = probe(x1, "p1", p);
  r.p2 = probe(x2, "p2", p);
  r.theta1 = probe(x1, "theta1", theta);
  r.theta2 = probe(x2, "theta2", theta);
  r.u1 = probe(x1, "u1", u);
  r.u2 = probe(x2, "u2", u);
  return r;
}

/// Exact solution sampled at the lattice nodes after `steps` steps (same layout as a snapshot).
inline Snapshot riemann_profile(const ShockTubeConfig& config, int steps) {
  const RiemannSolution sol = solve_riemann(config.state_left_of_interface(), config.state_right_of_interface());
  Snapshot s;
  s.step = steps;
  const double dx = config.spacing();
  // The discontinuity sits midway between nodes interface-1 and interface.
  const double origin = static_cast<double>(config.interface) - 0.5;
  for (int x = 1; x <= config.nodes; ++x) {
    GasState g;
    if (steps == 0) {
      g = x < config.interface ? sol.left : sol.right;
    } else {
      g = sample(sol, (static_cast<double>(x) - origin) * dx / static_cast<double>(steps));
    }
    s.rho.push_back(g.rho);
    s.u.push_back(g.u);
    s.theta.push_back(g.theta);
  }
  return s;
}

}  // namespace tlbm
