#include "tlbm/catalog.hpp"
#include "tlbm/moments.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace tlbm;

namespace {

double quadrature_mb_moment(unsigned m, double rho, double U, double theta) {
  auto f = [&](double v) {
    return std::pow(v, m) * rho / std::sqrt(std::numbers::pi * theta) * std::exp(-(v - U) * (v - U) / theta);
  };
  const double inf = std::numeric_limits<double>::infinity();
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -inf, inf, 15, 1e-14);
}

}  // namespace

TEST(GaussianMoment, KnownValues) {
  EXPECT_EQ(gaussian_moment(0).coefficient, Rational(1));
  EXPECT_EQ(gaussian_moment(1).coefficient, Rational(0));
  EXPECT_EQ(gaussian_moment(4).coefficient, Rational(3, 4));
  EXPECT_EQ(gaussian_moment(6).coefficient, Rational(15, 8));
  EXPECT_NEAR(gaussian_moment(0).value(), std::sqrt(std::numbers::pi), 1e-15);
}

TEST(GaussianMoment, Recurrence) {
  for (unsigned n = 2; n <= 40; ++n) {
    EXPECT_EQ(gaussian_moment(n).coefficient, Rational(n - 1, 2) * gaussian_moment(n - 2).coefficient) << n;
  }
}

TEST(GaussianMoment, AgreesWithGammaFunction) {
  for (unsigned n = 0; n <= 30; n += 2) {
    const double expected = std::tgamma((n + 1) / 2.0);
    EXPECT_NEAR(gaussian_moment(n).value() / expected, 1.0, 1e-14) << n;
  }
}

TEST(MbMoment, Examples) {
  EXPECT_DOUBLE_EQ(mb_moment(0, 1, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(mb_moment(2, 1, 0, 1), 0.5);
  EXPECT_DOUBLE_EQ(mb_moment(4, 1, 0, 1), 0.75);
  EXPECT_NEAR(mb_moment(1, 2, 0.3, 1), 0.6, 1e-15);
}

TEST(MbMoment, LowOrderClosedForms) {
  const double rho = 1.7;
  const double U = -0.35;
  const double th = 0.8;
  EXPECT_NEAR(mb_moment(2, rho, U, th), rho * (U * U + th / 2), 1e-14);
  EXPECT_NEAR(mb_moment(3, rho, U, th), rho * (U * U * U + 1.5 * U * th), 1e-14);
  EXPECT_NEAR(mb_moment(4, rho, U, th), rho * (std::pow(U, 4) + 3 * U * U * th + 0.75 * th * th), 1e-14);
}

TEST(MbMoment, MatchesAdaptiveQuadrature) {
  for (double rho : {1.0, 3.0}) {
    for (double U : {-0.5, 0.0, 0.5}) {
      for (double th : {0.5, 1.0, 1.5}) {
        for (unsigned m = 0; m <= 8; ++m) {
          const double closed = mb_moment(m, rho, U, th);
          const double numeric = quadrature_mb_moment(m, rho, U, th);
          if (std::abs(numeric) < 1e-13) {
            EXPECT_NEAR(closed, numeric, 1e-13);
          } else {
            EXPECT_NEAR(closed / numeric, 1.0, 1e-10) << m << ' ' << rho << ' ' << U << ' ' << th;
          }
        }
      }
    }
  }
}

TEST(MbMoment, RejectsNonPositiveInputs) {
  EXPECT_THROW((void)mb_moment(2, 0.0, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW((void)mb_moment(2, 1.0, 0.0, 0.0), InvalidArgument);
  EXPECT_THROW((void)mb_moment(2, 1.0, 0.0, -1.0), InvalidArgument);
}

TEST(DiscreteMoment, ThreeVelocityModel) {
  const VelocityModel m = catalog_model("q3");
  const double sp = std::sqrt(std::numbers::pi);
  EXPECT_EQ(discrete_moment(m, 1), 0.0);
  EXPECT_NEAR(discrete_moment(m, 0), sp, 1e-15);
  EXPECT_NEAR(discrete_moment(m, 2), sp / 2, 1e-15);
}

TEST(DiscreteMoment, OddMomentsVanishExactly) {
  for (const auto& e : catalog()) {
    const VelocityModel m = resolve(e);
    for (unsigned n = 1; n <= static_cast<unsigned>(e.q) + 4; n += 2) {
      EXPECT_EQ(discrete_moment(m, n), 0.0) << e.name << " n=" << n;
    }
  }
}
