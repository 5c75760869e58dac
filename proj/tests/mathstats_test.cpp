#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include "ctxsearch/mathstats.hpp"
#include "support.hpp"

using namespace ctxsearch;

TEST(RngStream, SameSeedAndStreamGiveSameSequence) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.uniform(), b.uniform());
    ASSERT_EQ(a.normal(), b.normal());
  }
}

TEST(RngStream, StreamsDiffer) {
  RngStream a(42, 7), b(42, 8), c(43, 7);
  int same_b = 0, same_c = 0;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    same_b += x == b.uniform();
    same_c += x == c.uniform();
  }
  EXPECT_EQ(same_b, 0);
  EXPECT_EQ(same_c, 0);
}

TEST(RngStream, ThreadScheduleDoesNotMatter) {
  auto draw = [](std::uint64_t id) {
    RngStream r(99, id);
    std::vector<double> v;
    for (int i = 0; i < 500; ++i) v.push_back(r.uniform());
    return v;
  };
  std::vector<std::vector<double>> serial, threaded(8);
  for (std::uint64_t i = 0; i < 8; ++i) serial.push_back(draw(i));
  {
    std::vector<std::jthread> pool;
    for (std::uint64_t i = 8; i-- > 0;) pool.emplace_back([&, i] { threaded[i] = draw(i); });
  }
  EXPECT_EQ(serial, threaded);
}

TEST(RngStream, SubstreamLeavesParentUntouched) {
  RngStream a(5, 1), b(5, 1);
  RngStream s = a.substream(3);
  (void)s.uniform();
  EXPECT_EQ(a.uniform(), b.uniform());
  EXPECT_NE(a.substream(3).uniform(), a.substream(4).uniform());
}

TEST(RngStream, UniformRange) {
  RngStream r(1, 2);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.uniform(-3.0, -1.0);
    ASSERT_GE(v, -3.0);
    ASSERT_LT(v, -1.0);
  }
}

TEST(UniformBall, OneDimensionStaysInInterval) {
  RngStream r(3, 0);
  double lo = 1, hi = -1;
  for (int i = 0; i < 10000; ++i) {
    const Vector x = sample_uniform_ball(1, r);
    ASSERT_EQ(x.size(), 1);
    ASSERT_LE(std::abs(x[0]), 1.0);
    lo = std::min(lo, x[0]);
    hi = std::max(hi, x[0]);
  }
  // uniform on [-1, 1], so both ends get visited
  EXPECT_LT(lo, -0.99);
  EXPECT_GT(hi, 0.99);
}

TEST(UniformBall, NormAtMostOne) {
  RngStream r(4, 0);
  for (std::size_t d : {1u, 2u, 3u, 7u, 20u})
    for (int i = 0; i < 2000; ++i) ASSERT_LE(sample_uniform_ball(d, r).norm(), 1.0 + 1e-15);
}

TEST(UniformBall, CoordinateMeansNearZero) {
  RngStream r(5, 0);
  const int n = 1'000'000;
  double m0 = 0, m1 = 0;
  for (int i = 0; i < n; ++i) {
    const Vector x = sample_uniform_ball(2, r);
    m0 += x[0];
    m1 += x[1];
  }
  EXPECT_NEAR(m0 / n, 0.0, 0.005);
  EXPECT_NEAR(m1 / n, 0.0, 0.005);
}

TEST(UniformBall, RadiusLaw) {
  // Pr[||x|| <= r] = r^d
  RngStream r(6, 0);
  const int n = 200000;
  const std::size_t d = 5;
  int inside = 0;
  for (int i = 0; i < n; ++i) inside += sample_uniform_ball(d, r).norm() <= 0.8;
  const double p = std::pow(0.8, 5.0);
  EXPECT_NEAR(static_cast<double>(inside) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(UniformBall, ZeroDimensionRejected) {
  RngStream r(1, 1);
  EXPECT_THROW(sample_uniform_ball(0, r), InvalidArgument);
}

// Marginal law of one coordinate against the analytic slab bounds.
TEST(UniformBall, SlabProbabilityWithinAnalyticBounds) {
  const double edge = 1.0 / std::numbers::sqrt2;
  const std::vector<std::pair<double, double>> slabs{
      {0.05, 0.2}, {-0.3, 0.1}, {-edge, edge}, {0.5, edge}, {-0.01, 0.01}};
  const int n = 200000;
  for (std::size_t d : {2u, 5u, 10u}) {
    RngStream r(7, d);
    std::vector<double> x1(n);
    for (auto& v : x1) v = sample_uniform_ball(d, r)[0];
    for (auto [a, b] : slabs) {
      int hits = 0;
      for (double v : x1) hits += v >= a && v <= b;
      const double p = static_cast<double>(hits) / n;
      const double sigma = std::sqrt(std::max(p * (1 - p), 1.0 / n) / n);
      const auto bounds = test_support::ball_slab_bounds(d, a, b);
      EXPECT_GE(p, bounds.lower - 3 * sigma) << "d=" << d << " [" << a << "," << b << "]";
      EXPECT_LE(p, bounds.upper + 3 * sigma) << "d=" << d << " [" << a << "," << b << "]";
    }
  }
}

TEST(Quadrature, AdaptiveSimpsonMatchesClosedForm) {
  // int_0^1 exp(-u^2/2) du = sqrt(pi/2) erf(1/sqrt 2)
  const double exact = std::sqrt(std::numbers::pi / 2) * std::erf(1 / std::numbers::sqrt2);
  EXPECT_NEAR(test_support::integrate([](double u) { return std::exp(-u * u / 2); }, 0, 1), exact,
              1e-8 * exact);
  EXPECT_NEAR(test_support::integrate([](double u) { return u * u; }, -1, 2), 3.0, 1e-12);
}

TEST(Hoeffding, WorkedExample) {
  const auto ci = hoeffding_interval(5, 10, 10, 0.1);
  EXPECT_DOUBLE_EQ(ci.center(), 0.5);
  EXPECT_NEAR(ci.half_width(), std::sqrt(std::log(8000.0) / 20.0), 1e-12);
  EXPECT_NEAR(ci.half_width(), 0.6703, 5e-5);
  EXPECT_LT(ci.lower, 0.0);  // unclipped
  EXPECT_GT(ci.upper, 1.0);
}

TEST(Hoeffding, ZeroSuccessesLowerIsMinusHalfWidth) {
  for (std::size_t t : {1u, 10u, 1000u})
    for (double delta : {0.01, 0.5}) {
      const auto ci = hoeffding_interval(0, t, 50, delta);
      EXPECT_DOUBLE_EQ(ci.lower, -ci.half_width());
      EXPECT_LE(ci.lower, 0.0);
    }
}

TEST(Hoeffding, HalfWidthShrinksWithTrials) {
  double prev = hoeffding_interval(0, 1, 100, 0.1).half_width();
  for (std::size_t t = 2; t <= 1024; t *= 2) {
    const double h = hoeffding_interval(t / 2, t, 100, 0.1).half_width();
    EXPECT_LT(h, prev);
    prev = h;
  }
}

TEST(Hoeffding, RejectsBadArguments) {
  EXPECT_THROW(hoeffding_interval(0, 0, 1, 0.1), InvalidArgument);
  EXPECT_THROW(hoeffding_interval(3, 2, 1, 0.1), InvalidArgument);
  EXPECT_THROW(hoeffding_interval(1, 2, 0, 0.1), InvalidArgument);
  EXPECT_THROW(hoeffding_interval(1, 2, 1, 0.0), InvalidArgument);
  EXPECT_THROW(hoeffding_interval(1, 2, 1, 1.0), InvalidArgument);
}

TEST(Hoeffding, CoverageAtUnionBoundLevel) {
  RngStream r(11, 0);
  const double delta = 0.1;
  for (double p : {0.1, 0.5, 0.83})
    for (std::size_t trials : {5u, 40u, 300u})
      for (std::size_t global_n : {1u, 10u}) {
        const int reps = 1000;
        int covered = 0;
        for (int k = 0; k < reps; ++k) {
          std::size_t s = 0;
          for (std::size_t i = 0; i < trials; ++i) s += r.uniform() < p;
          covered += hoeffding_interval(s, trials, global_n, delta).contains(p);
        }
        const double level = 1.0 - delta / (4.0 * global_n * global_n);
        EXPECT_GE(static_cast<double>(covered) / reps, level)
            << "p=" << p << " trials=" << trials << " n=" << global_n;
      }
}

TEST(LogLogSlope, TwoPointExact) {
  const std::vector<std::pair<double, double>> pts{{10, 1.0}, {1000, 0.1}};
  const auto fit = fit_loglog_slope(pts);
  EXPECT_NEAR(fit.slope, -0.5, 1e-12);
  EXPECT_NEAR(fit.intercept, 0.5 * std::log(10.0), 1e-12);
}

TEST(LogLogSlope, ConstantErrorsGiveZero) {
  const std::vector<std::pair<double, double>> pts{{10, 0.3}, {100, 0.3}, {1000, 0.3}};
  EXPECT_NEAR(fit_loglog_slope(pts).slope, 0.0, 1e-12);
}

TEST(LogLogSlope, NoisyPowerLaw) {
  RngStream r(12, 0);
  std::vector<std::pair<double, double>> pts;
  for (double n = 1000; n <= 1e5 * 1.01; n *= std::sqrt(10.0))
    for (int k = 0; k < 10; ++k) pts.emplace_back(n, 3.0 / std::sqrt(n) * (1.0 + 0.01 * r.normal()));
  const double s = fit_loglog_slope(pts).slope;
  EXPECT_GE(s, -0.52);
  EXPECT_LE(s, -0.48);
}

TEST(LogLogSlope, Degenerate) {
  const std::vector<std::pair<double, double>> one_n{{10, 0.1}, {10, 0.2}};
  EXPECT_THROW(fit_loglog_slope(one_n), DegenerateFit);
  const std::vector<std::pair<double, double>> zero_err{{10, 0.0}, {100, 0.2}};
  EXPECT_THROW(fit_loglog_slope(zero_err), InvalidArgument);
}

TEST(AngleBetween, Examples) {
  Vector e1(2), e2(2), r(2);
  e1 << 1, 0;
  e2 << 0, 1;
  r << std::cos(0.3), std::sin(0.3);
  EXPECT_NEAR(angle_between(e1, e1), 0.0, 1e-7);
  EXPECT_NEAR(angle_between(e1, e2), std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(angle_between(e1, r), 0.3, 1e-12);
  EXPECT_NEAR(angle_between(e1, -e1), std::numbers::pi, 1e-7);
  EXPECT_THROW(angle_between(e1, Vector::Zero(2)), InvalidArgument);
  EXPECT_THROW(angle_between(e1, Vector::Ones(3)), InvalidArgument);
}

TEST(Median, OddEvenAndEmpty) {
  EXPECT_DOUBLE_EQ(median(std::vector<double>{3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median(std::vector<double>{4, 1, 3, 2}), 2.5);
  EXPECT_THROW(median(std::vector<double>{}), InvalidArgument);
}

TEST(CeilCount, ToleratesRoundOff) {
  EXPECT_EQ(ceil_count(20.0 / 0.1), 200u);
  EXPECT_EQ(ceil_count(10.0 / (0.2 * 0.2)), 250u);
  EXPECT_EQ(ceil_count(200.5), 201u);
  EXPECT_EQ(ceil_count(3.0), 3u);
}
