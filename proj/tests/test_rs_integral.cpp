#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "sustain/rs_integral.hpp"

using namespace sustain;

namespace {

WeightFunction fn(std::function<double(double)> f, double lo = 0.0, double hi = 1.0, std::string label = "fn") {
  return WeightFunction(lo, hi, std::move(f), std::move(label));
}

// Composite Simpson on [lo, hi] with n (even) panels.
double simpson(const std::function<double(double)>& g, double lo, double hi, int n = 2000) {
  const double h = (hi - lo) / n;
  double s = g(lo) + g(hi);
  for (int i = 1; i < n; ++i) s += g(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

struct RandomPartition {
  std::mt19937_64& rng;

  TaggedPartition operator()(double lo, double hi) {
    std::uniform_int_distribution<int> count(1, 40);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int g = count(rng);
    std::vector<double> cuts;
    for (int i = 0; i < g - 1; ++i) cuts.push_back(lo + (hi - lo) * u(rng));
    std::sort(cuts.begin(), cuts.end());
    TaggedPartition p;
    p.lo = lo;
    p.hi = hi;
    p.breakpoints.push_back(lo);
    for (double c : cuts) {
      if (c > p.breakpoints.back()) p.breakpoints.push_back(c);
    }
    if (p.breakpoints.back() >= hi) p.breakpoints.pop_back();
    p.breakpoints.push_back(hi);
    for (std::size_t i = 1; i < p.breakpoints.size(); ++i) {
      const double a = p.breakpoints[i - 1];
      const double b = p.breakpoints[i];
      p.tags.push_back(std::min(b, a + (b - a) * u(rng)));
    }
    p.validate();
    return p;
  }
};

// Random polynomial of degree <= 3 with coefficients in [-2, 2].
std::function<double(double)> random_cubic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  const double a0 = c(rng), a1 = c(rng), a2 = c(rng), a3 = c(rng);
  return [=](double x) { return a0 + x * (a1 + x * (a2 + x * a3)); };
}

}  // namespace

TEST(Partition, UniformMidpoint) {
  const auto p = make_uniform_partition(0, 1, 2, TagRule::Midpoint);
  EXPECT_EQ(p.breakpoints, (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(p.tags, (std::vector<double>{0.25, 0.75}));
}

TEST(Partition, SingleLeftInterval) {
  const auto p = make_uniform_partition(0, 1, 1, TagRule::Left);
  EXPECT_EQ(p.breakpoints, (std::vector<double>{0, 1}));
  EXPECT_EQ(p.tags, (std::vector<double>{0}));
}

TEST(Partition, RejectsBadInput) {
  EXPECT_THROW(make_uniform_partition(1, 0, 2, TagRule::Left), InvalidArgument);
  EXPECT_THROW(make_uniform_partition(0, 1, 0, TagRule::Left), InvalidArgument);
  TaggedPartition p{0, 1, {0, 0.5, 1}, {0.25, 0.45}};
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.tags = {0.25};
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {0, 1, {0, 0.6, 0.5, 1}, {0, 0.55, 0.7}};
  EXPECT_THROW(p.validate(), InvalidArgument);
  EXPECT_EQ(parse_tag_rule("right"), TagRule::Right);
  EXPECT_THROW(parse_tag_rule("centre"), InvalidArgument);
}

TEST(RsSum, HandEvaluatedMidpointSum) {
  const auto p = make_uniform_partition(0, 1, 4, TagRule::Midpoint);
  EXPECT_DOUBLE_EQ(rs_sum(fn([](double x) { return x; }), fn([](double x) { return x; }), p), 0.5);
}

TEST(RsSum, ConstantIntegrandTelescopes) {
  const auto sq = fn([](double x) { return x * x; });
  for (auto rule : {TagRule::Left, TagRule::Right, TagRule::Midpoint}) {
    EXPECT_NEAR(rs_sum(fn([](double) { return 1.0; }), sq, make_uniform_partition(0, 1, 7, rule)), 1.0, 1e-15);
  }
}

TEST(RsSum, DomainAndRegionChecks) {
  const auto p = make_uniform_partition(0, 1, 4, TagRule::Midpoint);
  const auto wide = fn([](double x) { return x; }, 0, 2);
  EXPECT_THROW(rs_sum(wide, fn([](double x) { return x; }), p), InvalidArgument);
  auto q = p;
  q.region_id = 1;
  const auto r2 = fn([](double x) { return x; }).with_region(2);
  EXPECT_THROW(rs_sum(r2, r2, q), InvalidArgument);
  const auto r1 = fn([](double x) { return x; }).with_region(1);
  EXPECT_DOUBLE_EQ(rs_sum(r1, r1, q), 0.5);
}

TEST(RsSum, NonFiniteEvaluationThrows) {
  EXPECT_THROW(fn([](double x) { return 1.0 / x; }), NonFiniteError);
  const auto p = make_uniform_partition(0, 1, 3, TagRule::Midpoint);
  bool poisoned = false;
  const auto sometimes = fn([&poisoned](double x) { return poisoned ? std::nan("") : x; });
  poisoned = true;
  EXPECT_THROW(rs_sum(sometimes, fn([](double x) { return x; }), p), NonFiniteError);
}

TEST(RsIntegrate, ApproachesTwoThirds) {
  const auto f = fn([](double x) { return x; });
  const auto omega = fn([](double x) { return x * x; });
  double prev_err = 1.0;
  for (std::size_t m = 1; m <= 10; ++m) {
    const double s = rs_sum(f, omega, make_uniform_partition(0, 1, std::size_t{1} << m, TagRule::Midpoint));
    const double err = std::abs(s - 2.0 / 3.0);
    EXPECT_LE(err, prev_err);
    prev_err = err;
  }
  EXPECT_LT(prev_err, 1e-6);
  EXPECT_NEAR(rs_integrate(f, omega, 0, 1, 1e-6), 2.0 / 3.0, 1e-6);
}

TEST(RsIntegrate, ConstantIntegrandSettlesAtFirstRefinement) {
  const auto r = rs_integrate_detailed(fn([](double) { return 3.0; }), fn([](double x) { return std::exp(x); }), 0,
                                       1, 1e-9);
  EXPECT_EQ(r.levels, 1u);
  EXPECT_NEAR(r.value, 3.0 * (std::exp(1.0) - 1.0), 1e-14);
}

TEST(RsIntegrate, SharedStepIsNotIntegrable) {
  const auto step = fn([](double x) { return x >= 0.5 ? 1.0 : 0.0; }, 0, 1, "step");
  EXPECT_THROW(rs_integrate(step, step, 0, 1, 1e-9), ConvergenceError);
}

TEST(RsIntegrate, SharedJumpOffTheDyadicGridIsNotIntegrable) {
  const auto step = fn([](double x) { return x >= 1.0 / 3.0 ? 1.0 : 0.0; }, 0, 1, "step");
  EXPECT_THROW(rs_integrate(step, step, 0, 1, 1e-3), ConvergenceError);
}

TEST(RsIntegrate, TightToleranceOnSmoothPair) {
  const auto f = fn([](double x) { return std::exp(x); });
  const auto omega = fn([](double x) { return std::sin(3.0 * x); });
  const double e = std::exp(1.0);
  const double exact = 0.3 * (e * (std::cos(3.0) + 3.0 * std::sin(3.0)) - 1.0);
  EXPECT_NEAR(rs_integrate(f, omega, 0, 1, 1e-8), exact, 1e-8);
}

TEST(RsIntegrate, StepWeightWithContinuousIntegrand) {
  const auto step = fn([](double x) { return x >= 0.5 ? 1.0 : 0.0; }, 0, 1, "step");
  const auto f = fn([](double x) { return x * x; });
  // The jump sits on a breakpoint, so tag choice moves the sum by about h / 2.
  EXPECT_NEAR(rs_integrate(f, step, 0, 1, 1e-5), 0.25, 1e-5);
}

TEST(RsIntegrate, RejectsBadArguments) {
  const auto f = fn([](double x) { return x; });
  EXPECT_THROW(rs_integrate(f, f, 0, 1, 0.0), InvalidArgument);
  EXPECT_THROW(rs_integrate(f, f, 0, 2, 1e-6), InvalidArgument);
}

TEST(RsIntegrateProperty, MatchesRiemannIntegralOfDerivative) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> a(0.5, 4.0), b(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto F = random_cubic(rng);
    const double freq = a(rng), phase = b(rng);
    const auto omega = fn([=](double x) { return std::sin(freq * x + phase); });
    const double oracle = simpson([&](double x) { return F(x) * freq * std::cos(freq * x + phase); }, 0, 1);
    EXPECT_NEAR(rs_integrate(fn(F), omega, 0, 1, 1e-5), oracle, 1e-5);
  }
}

TEST(RsSumProperty, TelescopingAndLinearity) {
  std::mt19937_64 rng(1234);
  RandomPartition random_partition{rng};
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_partition(0.0, 1.0);
    const double c = coef(rng), a = coef(rng), b = coef(rng);
    const auto f1 = random_cubic(rng), f2 = random_cubic(rng), w1 = random_cubic(rng), w2 = random_cubic(rng);
    const auto W1 = fn(w1), W2 = fn(w2), F1 = fn(f1), F2 = fn(f2);

    const double tele = rs_sum(fn([c](double) { return c; }), W1, p);
    const double expected = c * (w1(1.0) - w1(0.0));
    EXPECT_NEAR(tele, expected, 1e-12 * (1.0 + std::abs(c) * 10.0));

    const auto combo = fn([&](double x) { return a * f1(x) + b * f2(x); });
    const double lin = a * rs_sum(F1, W1, p) + b * rs_sum(F2, W1, p);
    EXPECT_NEAR(rs_sum(combo, W1, p), lin, 1e-11 * (1.0 + std::abs(lin)));

    const auto wcombo = fn([&](double x) { return a * w1(x) + b * w2(x); });
    const double lin_w = a * rs_sum(F1, W1, p) + b * rs_sum(F1, W2, p);
    EXPECT_NEAR(rs_sum(F1, wcombo, p), lin_w, 1e-11 * (1.0 + std::abs(lin_w)));
  }
}

TEST(Variation, Examples) {
  const auto sq = fn([](double x) { return x * x; });
  for (std::size_t n : {1u, 3u, 16u}) {
    EXPECT_NEAR(total_variation(sq, make_uniform_partition(0, 1, n, TagRule::Left)), 1.0, 1e-15);
  }
  EXPECT_EQ(variation_sup(fn([](double) { return 2.0; }), 0, 1), 0.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const auto s = fn([](double x) { return std::sin(x); }, 0, two_pi);
  EXPECT_NEAR(variation_sup(s, 0, two_pi), 4.0, 1e-4);
  EXPECT_FALSE(variation_sup_detailed(s, 0, two_pi).monotone);
  EXPECT_TRUE(variation_sup_detailed(sq, 0, 1).monotone);
}

TEST(VariationProperty, MonotoneWeightVariationIsNetChange) {
  std::mt19937_64 rng(8);
  RandomPartition random_partition{rng};
  std::uniform_real_distribution<double> k(0.1, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = k(rng), b = k(rng);
    const auto omega = fn([=](double x) { return a * x + b * x * x * x; });
    EXPECT_NEAR(total_variation(omega, random_partition(0, 1)), a + b, 1e-12 * (a + b));
  }
}

TEST(VariationProperty, RefinementNeverDecreasesVariation) {
  std::mt19937_64 rng(9);
  RandomPartition random_partition{rng};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = random_cubic(rng);
    const auto omega = fn([&](double x) { return w(x) + 0.3 * std::sin(12.0 * x); });
    auto p = random_partition(0, 1);
    double prev = total_variation(omega, p);
    for (int add = 0; add < 5; ++add) {
      const double x = u(rng);
      auto it = std::lower_bound(p.breakpoints.begin(), p.breakpoints.end(), x);
      if (it == p.breakpoints.end() || *it == x || it == p.breakpoints.begin()) continue;
      p.breakpoints.insert(it, x);
      p.tags.assign(p.breakpoints.begin(), p.breakpoints.end() - 1);
      const double v = total_variation(omega, p);
      EXPECT_GE(v, prev - 1e-14);
      prev = v;
    }
  }
}

TEST(LowerBound, Examples) {
  const auto id = fn([](double x) { return x; });
  auto r = variation_lower_bound_check(id, id, 0, 1);
  EXPECT_NEAR(r.lhs, 1.0, 1e-12);
  EXPECT_NEAR(r.rhs, 0.5, 1e-6);
  EXPECT_TRUE(r.holds);

  r = variation_lower_bound_check(fn([](double) { return 1.0; }), id, 0, 1);
  EXPECT_NEAR(r.lhs, 1.0, 1e-12);
  EXPECT_NEAR(r.rhs, 1.0, 1e-12);
  EXPECT_TRUE(r.holds);

  r = variation_lower_bound_check(id, fn([](double) { return 4.0; }), 0, 1);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_TRUE(r.holds);
}

TEST(LowerBound, ZeroIntegrandIsVacuous) {
  const auto r = variation_lower_bound_check(fn([](double) { return 0.0; }), fn([](double x) { return x; }), 0, 1);
  EXPECT_TRUE(r.vacuous);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.rhs, 0.0);
}

TEST(LowerBoundProperty, HoldsForRandomPairs) {
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> u(0.0, 1.0), amp(0.2, 3.0);
  std::uniform_int_distribution<int> kind(0, 3);
  for (int trial = 0; trial < 120; ++trial) {
    const auto F = random_cubic(rng);
    const double c = u(rng), s = amp(rng);
    std::function<double(double)> omega;
    switch (kind(rng)) {
      case 0: omega = [=](double x) { return s * std::abs(x - c); }; break;
      case 1: omega = [=](double x) { return std::sin(s * 6.0 * x + c); }; break;
      case 2: omega = [=](double x) { return s * (x - c) * (x - c) * (x - 0.5); }; break;
      default: omega = [=](double x) { return x < c ? s * x : s * c - 0.5 * (x - c); }; break;
    }
    const auto r = variation_lower_bound_check(fn(F), fn(omega), 0, 1, 1e-4);
    EXPECT_TRUE(r.holds) << "trial " << trial << ": lhs " << r.lhs << " rhs " << r.rhs;
    EXPECT_GE(r.lhs, 0.0);
  }
}

TEST(Tabulated, InterpolatesAndClamps) {
  const auto t = tabulated_function({{0.0, 0.0}, {1.0, 2.0}, {2.0, 2.0}});
  EXPECT_DOUBLE_EQ(t(0.5), 1.0);
  EXPECT_DOUBLE_EQ(t(1.5), 2.0);
  EXPECT_EQ(t.lo(), 0.0);
  EXPECT_EQ(t.hi(), 2.0);
  EXPECT_NEAR(variation_sup(t, 0, 2), 2.0, 1e-12);
  EXPECT_THROW(tabulated_function({{0.0, 1.0}}), ValidationError);
  EXPECT_THROW(tabulated_function({{0.0, 1.0}, {0.0, 2.0}}), ValidationError);
}
