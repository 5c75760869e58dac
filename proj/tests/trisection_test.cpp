#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "ctxsearch/trisection.hpp"

using namespace ctxsearch;

namespace {

TrisectionConfig reference_config() {
  TrisectionConfig c;
  c.eps_s = 0.5;
  c.delta_s = 0.1;
  c.b_bound = 5.0;
  return c;
}

}  // namespace

TEST(Trisection, ConfigValidation) {
  TrisectionConfig c;
  c.eps_s = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.eps_s = 10.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.delta_s = 1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.b_bound = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Trisection, CoverageAndWidthOnDefaultEnvironment) {
  int covered = 0;
  const int runs = 60;
  for (int s = 0; s < runs; ++s) {
    auto env = make_default_environment(2, RngStream(100 + s, 0));
    const auto r = trisection_search(env, reference_config());
    EXPECT_LE(r.b2 - r.b1, 0.5 + 1e-12);
    EXPECT_LE(r.b1, r.b2);
    covered += r.b1 <= 2.5 && 2.5 <= r.b2;
  }
  EXPECT_GE(covered, static_cast<int>(0.85 * runs));
}

TEST(Trisection, DegenerateDirectionHasExactRoot) {
  int covered = 0;
  const int runs = 60;
  for (int s = 0; s < runs; ++s) {
    Environment env({Vector::Zero(2), -2.5}, NoiseDistribution::uniform_symmetric(1.0),
                    ContextDistribution::uniform_ball(2), RngStream(200 + s, 0));
    const auto r = trisection_search(env, reference_config());
    covered += r.b1 <= 2.5 && 2.5 <= r.b2;
  }
  EXPECT_GE(covered, static_cast<int>(std::floor((1 - 0.1) * runs)));
}

TEST(Trisection, StructuralInvariants) {
  auto env = make_default_environment(2, RngStream(300, 0));
  const auto cfg = reference_config();

  std::size_t steps = 0;
  std::map<std::size_t, std::pair<double, double>> probes;  // iteration -> (b3, b4)
  std::size_t last_local = 0, last_global = 0;
  const auto r = trisection_search(env, cfg, [&](const TrisectionStep& st) {
    ++steps;
    probes[st.iteration] = {st.b3, st.b4};
    EXPECT_EQ(st.global_n, last_global + 1);
    EXPECT_TRUE(st.local_n == last_local + 1 || st.local_n == 1);
    last_local = st.local_n;
    last_global = st.global_n;
  });

  EXPECT_EQ(r.labels_used, 2 * steps);
  EXPECT_EQ(r.samples_seen, r.labels_used);
  EXPECT_EQ(env.labels_used(), r.labels_used);
  EXPECT_EQ(env.samples_seen(), r.samples_seen);
  EXPECT_EQ(probes.size(), r.iterations);

  // Probes sit at the third-points, so each round's bracket is
  // [2 b3 - b4, 2 b4 - b3].
  std::vector<std::pair<double, double>> brackets;
  for (const auto& [it, p] : probes) brackets.emplace_back(2 * p.first - p.second, 2 * p.second - p.first);
  brackets.emplace_back(r.b1, r.b2);
  EXPECT_NEAR(brackets.front().first, -cfg.b_bound, 1e-12);
  EXPECT_NEAR(brackets.front().second, cfg.b_bound, 1e-12);
  for (std::size_t i = 1; i < brackets.size(); ++i) {
    const auto [p1, p2] = brackets[i - 1];
    const auto [n1, n2] = brackets[i];
    EXPECT_GE(n1, p1 - 1e-9);
    EXPECT_LE(n2, p2 + 1e-9);
    EXPECT_LT(n1, n2);
    EXPECT_NEAR((n2 - n1) / (p2 - p1), 2.0 / 3.0, 1e-9);
    // exactly one end moved
    EXPECT_TRUE(std::abs(n1 - p1) < 1e-9 || std::abs(n2 - p2) < 1e-9);
  }
}

TEST(Trisection, IterationCountMatchesGeometry) {
  // width 10 (2/3)^k <= 0.5 first at k = 8
  auto env = make_default_environment(2, RngStream(301, 0));
  const auto r = trisection_search(env, reference_config());
  EXPECT_EQ(r.iterations, 8u);
  EXPECT_NEAR(r.b2 - r.b1, 10.0 * std::pow(2.0 / 3.0, 8), 1e-9);
}

// With the true label rates as an oracle: how often every interval covers,
// and whether the bracket keeps the root on those runs.
TEST(Trisection, AnytimeValidityAndConditionalCorrectness) {
  const auto cfg = reference_config();
  const int runs = 25;
  int all_cover = 0;
  for (int s = 0; s < runs; ++s) {
    auto env = make_default_environment(2, RngStream(400 + s, 0));
    auto oracle = make_default_environment(2, RngStream(400 + s, 1));
    std::map<double, double> rate;
    auto true_rate = [&](double b) {
      auto it = rate.find(b);
      if (it == rate.end()) it = rate.emplace(b, oracle.win_rate(b, 200000)).first;
      return it->second;
    };
    bool ok = true;
    const auto r = trisection_search(env, cfg, [&](const TrisectionStep& st) {
      // Monte-Carlo slack well below the interval widths at stake
      ok = ok && st.ci3.lower - 0.004 <= true_rate(st.b3) && true_rate(st.b3) <= st.ci3.upper + 0.004;
      ok = ok && st.ci4.lower - 0.004 <= true_rate(st.b4) && true_rate(st.b4) <= st.ci4.upper + 0.004;
    });
    if (ok) {
      ++all_cover;
      EXPECT_LE(r.b1, 2.5);
      EXPECT_GE(r.b2, 2.5);
    }
  }
  EXPECT_GE(all_cover, static_cast<int>(std::floor((1 - cfg.delta_s) * runs)));
}

TEST(Trisection, LabelCountWithinFrozenOrderBound) {
  // C calibrated once on d = 2 pilot runs (worst ratio about 3.7e3) and frozen
  constexpr double kC = 6000.0;
  for (double eps : {0.5, 0.25}) {
    for (int s = 0; s < 10; ++s) {
      auto env = make_default_environment(2, RngStream(500 + s, 0));
      auto cfg = reference_config();
      cfg.eps_s = eps;
      const auto r = trisection_search(env, cfg);
      const double order = std::log(1.0 / (cfg.delta_s * eps)) / (eps * eps);
      EXPECT_LE(static_cast<double>(r.labels_used), kC * order) << "eps=" << eps;
    }
  }
}

TEST(Trisection, LabelCapThrowsWithPartialResult) {
  auto env = make_default_environment(2, RngStream(600, 0));
  auto cfg = reference_config();
  cfg.max_labels = 1000;
  try {
    trisection_search(env, cfg);
    FAIL() << "expected TrisectionBudgetExhausted";
  } catch (const TrisectionBudgetExhausted& e) {
    EXPECT_LE(e.partial().labels_used, 1000u);
    EXPECT_LE(e.partial().b1, e.partial().b2);
    EXPECT_EQ(env.labels_used(), e.partial().labels_used);
  }
}

TEST(Trisection, WideToleranceReturnsImmediately) {
  auto env = make_default_environment(2, RngStream(601, 0));
  auto cfg = reference_config();
  cfg.eps_s = 9.99;
  const auto r = trisection_search(env, cfg);
  EXPECT_EQ(r.iterations, 1u);
  cfg.eps_s = 10.0;
  EXPECT_THROW(trisection_search(env, cfg), InvalidArgument);
}

TEST(Trisection, Deterministic) {
  auto a = make_default_environment(3, RngStream(700, 0));
  auto b = make_default_environment(3, RngStream(700, 0));
  const auto ra = trisection_search(a, reference_config());
  const auto rb = trisection_search(b, reference_config());
  EXPECT_EQ(ra.b1, rb.b1);
  EXPECT_EQ(ra.b2, rb.b2);
  EXPECT_EQ(ra.labels_used, rb.labels_used);
}
