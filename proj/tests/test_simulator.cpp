#include "tlbm/catalog.hpp"
#include "tlbm/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tlbm;

namespace {

ShockTubeConfig make_config(const std::string& model, const std::string& expansion, double rho_bar = 3.0) {
  ShockTubeConfig c;
  c.model = catalog_model(model);
  c.expansion = {expansion.substr(0, 2) == "TE" ? ExpansionKind::Taylor : ExpansionKind::Hermite,
                 std::stoi(expansion.substr(2)), 1};
  c.high_density = rho_bar;
  c.workers = 1;
  return c;
}

std::size_t partner(std::size_t i) { return i == 0 ? 0 : (i % 2 == 1 ? i + 1 : i - 1); }

}  // namespace

TEST(ShockTubeConfig, Validation) {
  auto c = make_config("q5", "HE3");
  EXPECT_NO_THROW(c.validate());
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = make_config("q5", "HE3", -1.0);
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = make_config("q5", "HE3");
  c.interface = 2;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = make_config("q5", "HE3");
  c.nodes = 10;
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_THROW(ShockTube{c}, InvalidArgument);
}

TEST(ShockTube, InitialPopulations) {
  ShockTube tube(make_config("q3", "TE2"));
  EXPECT_NEAR(tube.state().f(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(tube.state().f(1, 0), 0.5, 1e-15);
  EXPECT_NEAR(tube.state().f(2, 0), 0.5, 1e-15);
  EXPECT_NEAR(tube.state().f(0, 999), 2.0 / 3, 1e-15);
  EXPECT_EQ(tube.band(), 1U);
}

TEST(ShockTube, HighSideOrientation) {
  auto c = make_config("q21", "TE5", 11.0);
  c.high_side = HighSide::Right;
  ShockTube tube(c);
  const auto& s = tube.state().fields();
  EXPECT_NEAR(s.rho[0], 1.0, 1e-13);
  EXPECT_NEAR(s.rho[498], 1.0, 1e-13);
  EXPECT_NEAR(s.rho[499], 11.0, 1e-12);
  EXPECT_NEAR(s.rho[999], 11.0, 1e-12);
}

TEST(ShockTube, BoundaryBands) {
  auto c = make_config("q5", "HE3");
  c.steps = 20;
  ShockTube tube(c);
  EXPECT_EQ(tube.band(), 3U);
  for (int t = 0; t < 20; ++t) {
    tube.step();
  }
  const auto& s = tube.state().fields();
  for (std::size_t x = 0; x < 3; ++x) {
    EXPECT_NEAR(s.rho[x], 3.0, 1e-14);
    EXPECT_NEAR(s.u[x], 0.0, 1e-14);
    EXPECT_NEAR(s.theta[x], 1.0, 1e-14);
    EXPECT_NEAR(s.rho[999 - x], 1.0, 1e-14);
  }
}

TEST(ShockTube, UniformStateIsFixedPoint) {
  for (const auto& [model, expansion] : std::vector<std::pair<std::string, std::string>>{
           {"q5", "HE3"}, {"q7", "TE3"}, {"q11", "TE4"}, {"q21", "TE5"}}) {
    auto c = make_config(model, expansion, 1.0);
    c.steps = 10;
    ShockTube tube(c);
    const auto before = tube.state().populations();
    for (int t = 0; t < 10; ++t) {
      tube.step();
    }
    const auto& after = tube.state().populations();
    for (std::size_t k = 0; k < before.size(); ++k) {
      ASSERT_NEAR(after[k], before[k], 1e-13) << model;
    }
    const auto r = run(c);
    const auto p = extract_plateaus(r.final_snapshot());
    EXPECT_NEAR(p.rho1.at_node, 1.0, 1e-13);
    EXPECT_NEAR(p.rho2.median, 1.0, 1e-13);
    EXPECT_NEAR(p.theta1.at_node, 1.0, 1e-13);
    EXPECT_NEAR(p.u2.at_node, 0.0, 1e-13);
    EXPECT_TRUE(p.flat);
  }
}

TEST(ShockTube, FullRelaxationAtUnitTau) {
  auto c = make_config("q7", "TE3");
  ShockTube tube(c);
  for (int t = 0; t < 30; ++t) {
    tube.step();
  }
  const Snapshot fields = tube.state().fields();
  tube.collide(0, tube.state().nodes());
  const auto model = c.model;
  const auto poly = expand(c.expansion);
  for (std::size_t x : {0UL, 400UL, 480UL, 500UL, 530UL, 999UL}) {
    const auto feq = evaluate_feq(model, poly, fields.rho[x], fields.u[x], fields.theta[x]);
    for (std::size_t i = 0; i < feq.size(); ++i) {
      EXPECT_DOUBLE_EQ(tube.state().f(i, x), feq[i]);
    }
  }
}

TEST(ShockTube, StreamingFluxAccounting) {
  auto c = make_config("q11", "TE4");
  c.tau = 0.8;
  ShockTube tube(c);
  const std::size_t n = tube.state().nodes();
  const std::size_t band = tube.band();
  const auto v = c.model.velocities();
  const auto shifts = c.model.shifts();
  for (int t = 0; t < 40; ++t) {
    tube.step();
  }
  tube.collide(0, n);
  const auto post = tube.state().populations();
  double mass_in = 0.0;
  double momentum_in = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t x = band; x < n - band; ++x) {
      const double fi = post[i * n + static_cast<std::size_t>(static_cast<long long>(x) - shifts[i])];
      mass_in += fi;
      momentum_in += v[i] * fi;
    }
  }
  tube.stream();
  tube.apply_boundaries();
  double mass = 0.0;
  double momentum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t x = band; x < n - band; ++x) {
      mass += tube.state().f(i, x);
      momentum += v[i] * tube.state().f(i, x);
    }
  }
  EXPECT_NEAR(mass / mass_in, 1.0, 1e-12);
  EXPECT_NEAR(momentum / momentum_in, 1.0, 1e-10);
}

TEST(ShockTube, StepConservesMassAwayFromBoundaries) {
  auto c = make_config("q5", "HE3");
  ShockTube tube(c);
  auto total = [&] {
    double m = 0.0;
    for (double r : tube.state().fields().rho) {
      m += r;
    }
    return m;
  };
  const double m0 = total();
  for (int t = 0; t < 60; ++t) {
    tube.step();
    EXPECT_NEAR(total() / m0, 1.0, 1e-12) << t;
  }
}

TEST(ShockTube, CollisionIsLocal) {
  auto c = make_config("q7", "TE3");
  c.tau = 0.7;
  ShockTube a(c);
  ShockTube b(c);
  for (int t = 0; t < 25; ++t) {
    a.step();
    b.step();
  }
  const std::size_t n = a.state().nodes();
  const std::size_t k = 505;
  for (std::size_t i = 0; i < a.q(); ++i) {
    b.state().f(i, k) *= 1.0 + 1e-3 * static_cast<double>(i + 1);
  }
  b.state().recompute_fields(c.model.velocities());
  a.collide(0, n);
  b.collide(0, n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t i = 0; i < a.q(); ++i) {
      if (x == k) {
        EXPECT_NE(a.state().f(i, x), b.state().f(i, x));
      } else {
        ASSERT_EQ(a.state().f(i, x), b.state().f(i, x)) << x;
      }
    }
  }
}

TEST(ShockTube, MirrorSymmetry) {
  auto left = make_config("q5", "HE3");
  left.steps = 100;
  auto right = left;
  right.high_side = HighSide::Right;
  right.interface = left.nodes - left.interface + 2;
  const auto a = run(left).final_snapshot();
  const auto b = run(right).final_snapshot();
  const std::size_t n = a.size();
  for (std::size_t x = 0; x < n; ++x) {
    ASSERT_NEAR(a.rho[x], b.rho[n - 1 - x], 1e-12) << x;
    ASSERT_NEAR(a.u[x], -b.u[n - 1 - x], 1e-12) << x;
    ASSERT_NEAR(a.theta[x], b.theta[n - 1 - x], 1e-12) << x;
  }
  ShockTube ta(left);
  ShockTube tb(right);
  for (std::size_t i = 0; i < ta.q(); ++i) {
    EXPECT_EQ(ta.state().f(i, 10), tb.state().f(partner(i), n - 11));
  }
}

TEST(ShockTube, DeterministicAcrossWorkers) {
  auto c = make_config("q11", "TE4");
  c.steps = 80;
  c.workers = 1;
  const auto one = run(c).final_snapshot();
  c.workers = 4;
  const auto four = run(c).final_snapshot();
  EXPECT_EQ(one.rho, four.rho);
  EXPECT_EQ(one.u, four.u);
  EXPECT_EQ(one.theta, four.theta);
}

TEST(Run, DefaultStepsAndSnapshots) {
  auto c = make_config("q5", "HE3");
  EXPECT_EQ(default_steps(c), 132);
  c.snapshot_interval = 50;
  const auto r = run(c);
  EXPECT_EQ(r.config.steps, 132);
  ASSERT_EQ(r.snapshots.size(), 4U);
  EXPECT_EQ(r.snapshots[0].step, 0);
  EXPECT_EQ(r.snapshots[1].step, 50);
  EXPECT_EQ(r.snapshots[2].step, 100);
  EXPECT_EQ(r.snapshots[3].step, 132);
}

TEST(Run, FiveVelocityPlateaus) {
  const auto r = run(make_config("q5", "HE3"));
  ASSERT_TRUE(r.verdict.stable);
  const auto p = extract_plateaus(r.final_snapshot());
  EXPECT_NEAR(p.rho1.at_node, 2.46, 0.02);
  EXPECT_NEAR(p.rho2.at_node, 1.18, 0.02);
  EXPECT_NEAR(p.p1.at_node, 1.65, 0.02);
  EXPECT_NEAR(p.p2.at_node, 1.65, 0.02);
  EXPECT_NEAR(p.theta1.at_node, 0.67, 0.02);
  EXPECT_NEAR(p.theta2.at_node, 1.40, 0.02);
  EXPECT_NEAR(p.u1.at_node, 0.22, 0.02);
  EXPECT_NEAR(p.u2.at_node, 0.22, 0.02);

  const auto te = run(make_config("q5", "TE2"));
  ASSERT_TRUE(te.verdict.stable);
  const auto pt = extract_plateaus(te.final_snapshot());
  EXPECT_NEAR(pt.rho1.at_node, 2.43, 0.02);
  EXPECT_NEAR(pt.theta1.at_node, 0.68, 0.02);
  EXPECT_NEAR(pt.u1.at_node, 0.23, 0.02);
}

TEST(Run, StabilityVerdicts) {
  const auto unstable = run(make_config("q5", "HE3", 4.0));
  EXPECT_FALSE(unstable.verdict.stable);
  EXPECT_GT(unstable.verdict.failure_step, 0);
  EXPECT_NE(unstable.verdict.failure_mode, FailureMode::None);
  auto fig = make_config("q21", "TE5", 11.0);
  fig.high_side = HighSide::Right;
  EXPECT_TRUE(run(fig).verdict.stable);
  EXPECT_EQ(run(make_config("q21", "TE5", 11.0)).verdict.stable, true);
}

TEST(Plateaus, FlatnessWarning) {
  const auto r = run(make_config("q5", "HE3"));
  const auto at_shock = extract_plateaus(r.final_snapshot(), 430, 850);
  EXPECT_FALSE(at_shock.flat);
  EXPECT_FALSE(at_shock.warnings.empty());
  EXPECT_THROW(extract_plateaus(r.final_snapshot(), 0, 650), InvalidArgument);
}

TEST(Plateaus, RiemannProfileMatchesSolution) {
  auto c = make_config("q7", "TE3");
  c.steps = default_steps(c);
  const auto exact = riemann_profile(c, c.steps);
  const auto p = extract_plateaus(exact);
  EXPECT_NEAR(p.rho1.at_node, 2.4575977654122436, 1e-12);
  EXPECT_NEAR(p.rho2.at_node, 1.1779161855467404, 1e-12);
  EXPECT_NEAR(exact.rho.front(), 3.0, 0.0);
  EXPECT_NEAR(exact.rho.back(), 1.0, 0.0);
}
