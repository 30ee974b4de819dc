#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "sustain/fd_solver.hpp"

using namespace sustain;

namespace {

ScenarioSpec square_spec(double side, std::size_t n, double s = 10.0) {
  ScenarioSpec spec;
  spec.domain = {{0.0, side}, {0.0, side}};
  spec.resolution = {n, n};
  spec.s = s;
  spec.boundary = [s](std::span<const double>, double t) { return s * t; };
  spec.initial = [](std::span<const double>) { return 0.0; };
  return spec;
}

double t1a(std::span<const double> x, double t) {
  double v = static_cast<double>(x.size()) * t;
  for (double xi : x) v += 0.5 * xi * xi;
  return v;
}

// Reference FTCS step for a 2D field, written index by index.
std::vector<double> reference_step_2d(const ScalarField& f, const BoundaryRule& rule, double dt) {
  const auto nx = f.extents[0], ny = f.extents[1];
  const double hx2 = f.spacings[0] * f.spacings[0], hy2 = f.spacings[1] * f.spacings[1];
  std::vector<double> out(f.values.size());
  auto u = [&](std::size_t i, std::size_t j) { return f.values[i * ny + j]; };
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      if (i == 0 || j == 0 || i + 1 == nx || j + 1 == ny) {
        const double x[] = {f.coordinate(0, i), f.coordinate(1, j)};
        out[i * ny + j] = rule(x, f.time + dt);
      } else {
        const double lap = (u(i + 1, j) - 2 * u(i, j) + u(i - 1, j)) / hx2 +
                           (u(i, j + 1) - 2 * u(i, j) + u(i, j - 1)) / hy2;
        out[i * ny + j] = u(i, j) + dt * lap;
      }
    }
  }
  return out;
}

std::size_t swapped(const ScalarField& f, std::size_t p) {
  auto idx = f.multi_index(p);
  std::swap(idx[0], idx[1]);
  return f.flat_index(idx);
}

}  // namespace

TEST(FdSolver, StableDtFormula) {
  const double h[] = {0.1, 0.2};
  EXPECT_DOUBLE_EQ(stable_dt(h), 0.9 / (2.0 * (100.0 + 25.0)));
}

TEST(FdSolver, ConstantFieldIsUnchanged) {
  ScenarioSpec spec = square_spec(1.0, 11);
  spec.boundary = [](std::span<const double>, double) { return 4.5; };
  spec.initial = [](std::span<const double>) { return 4.5; };
  const auto f = initial_field(spec);
  const auto g = step_explicit(f, spec.boundary, stable_dt(f.spacings));
  EXPECT_EQ(g.values, f.values);
}

TEST(FdSolver, OneStepIsExactOnQuadratics) {
  ScenarioSpec spec = square_spec(1.0, 9);
  spec.boundary = t1a;
  spec.initial = [](std::span<const double> x) { return t1a(x, 0.0); };
  const auto f = initial_field(spec);
  const double dt = stable_dt(f.spacings);
  const auto g = step_explicit(f, spec.boundary, dt);
  EXPECT_DOUBLE_EQ(g.time, dt);
  for (std::size_t p = 0; p < g.size(); ++p) {
    EXPECT_NEAR(g.values[p], t1a(g.coordinates(p), dt), 1e-10);
  }
}

TEST(FdSolver, RejectsUnstableStep) {
  const auto f = initial_field(square_spec(1.0, 11));
  EXPECT_THROW(step_explicit(f, square_spec(1.0, 11).boundary, stable_dt(f.spacings) * 1.001), StabilityError);
}

TEST(FdSolver, NonFiniteResultAborts) {
  auto spec = square_spec(1.0, 5);
  spec.boundary = [](std::span<const double>, double t) { return t > 0 ? std::nan("") : 0.0; };
  const auto f = initial_field(spec);
  EXPECT_THROW(step_explicit(f, spec.boundary, stable_dt(f.spacings)), NonFiniteError);
}

TEST(FdSolver, MatchesIndexByIndexStencil) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScenarioSpec spec;
  spec.domain = {{0.0, 2.0}, {-1.0, 0.5}};
  spec.resolution = {13, 8};
  spec.boundary = [](std::span<const double> x, double t) { return x[0] - x[1] + t; };
  spec.initial = [&](std::span<const double>) { return u(rng); };
  const auto f = initial_field(spec);
  const double dt = 0.7 * stable_dt(f.spacings);
  const auto g = step_explicit(f, spec.boundary, dt);
  const auto ref = reference_step_2d(f, spec.boundary, dt);
  for (std::size_t p = 0; p < ref.size(); ++p) EXPECT_NEAR(g.values[p], ref[p], 1e-14) << p;
}

TEST(FdSolver, ThreeDimensionalQuadraticStaysExact) {
  ScenarioSpec spec;
  spec.domain = {{0, 1}, {0, 1}, {0, 2}};
  spec.resolution = {6, 6, 11};
  spec.boundary = t1a;
  spec.initial = [](std::span<const double> x) { return t1a(x, 0.0); };
  spec.t_end = 0.05;
  const double times[] = {0.05};
  const auto run = run_scenario(spec, times);
  const auto& f = run.snapshots.front();
  EXPECT_DOUBLE_EQ(f.time, 0.05);
  for (std::size_t p = 0; p < f.size(); ++p) EXPECT_NEAR(f.values[p], t1a(f.coordinates(p), f.time), 1e-10);
}

TEST(ConvergenceStudy, QuadraticSolutionIsDiscretelyExact) {
  const std::pair<double, double> dom[] = {{0, 1}, {0, 1}};
  const std::size_t res[] = {5, 11, 21};
  const auto study = convergence_study(t1a, dom, res, 1.0);
  for (const auto& p : study.points) EXPECT_LT(p.max_error, 1e-8) << p.resolution;
}

TEST(ConvergenceStudy, ExponentialShowsSecondOrder) {
  const std::pair<double, double> dom[] = {{0, 1}, {0, 1}};
  const std::size_t res[] = {11, 21, 41};
  const auto exact = [](std::span<const double> x, double t) { return std::exp(2 * t + x[0] + x[1]); };
  const auto study = convergence_study(exact, dom, res, 0.1);
  ASSERT_EQ(study.observed_orders.size(), 2u);
  for (double order : study.observed_orders) EXPECT_GE(order, 1.9);
  EXPECT_LT(study.points.back().max_error, study.points.front().max_error);
}

TEST(ConvergenceStudy, ConstantSolutionHasNoError) {
  const std::pair<double, double> dom[] = {{0, 2}};
  const std::size_t res[] = {5, 9};
  const auto study = convergence_study([](std::span<const double>, double) { return 3.0; }, dom, res, 0.5);
  for (const auto& p : study.points) EXPECT_EQ(p.max_error, 0.0);
}

TEST(Scenario, SnapshotsAndFinalStep) {
  auto spec = square_spec(1.0, 11);
  spec.t_end = 0.1;
  spec.dt = 0.0015;
  const double times[] = {0.0, 0.05, 0.1};
  const auto run = run_scenario(spec, times);
  EXPECT_EQ(run.steps, 67u);
  EXPECT_DOUBLE_EQ(run.final_time, 0.1);
  EXPECT_EQ(run.snapshots[0].time, 0.0);
  EXPECT_NEAR(run.snapshots[1].time, 0.0495, 1e-12);
  EXPECT_EQ(run.snapshots[2].time, 0.1);
  const double bad[] = {0.2};
  EXPECT_THROW(run_scenario(spec, bad), InvalidArgument);
}

TEST(ScenarioProperty, MaximumPrincipleAndBoundaryIdentity) {
  auto spec = square_spec(3.0, 31);
  auto f = initial_field(spec);
  const double dt = stable_dt(f.spacings);
  for (int step = 0; step < 400; ++step) {
    f = step_explicit(f, spec.boundary, dt);
    const double bound = spec.s * f.time;
    for (std::size_t p = 0; p < f.size(); ++p) {
      if (f.is_boundary(p)) {
        ASSERT_EQ(f.values[p], spec.boundary(f.coordinates(p), f.time));
      } else {
        ASSERT_GE(f.values[p], 0.0);
        ASSERT_LE(f.values[p], bound);
      }
    }
  }
}

TEST(ScenarioProperty, SymmetricDataGivesSymmetricField) {
  auto spec = square_spec(6.0, 41);
  spec.t_end = 5.0;
  const double times[] = {1.0, 5.0};
  const auto run = run_scenario(spec, times);
  for (const auto& f : run.snapshots) {
    for (std::size_t p = 0; p < f.size(); ++p) EXPECT_NEAR(f.values[p], f.values[swapped(f, p)], 1e-12);
  }
}

TEST(Scenario, AsymmetricDomainBreaksSymmetry) {
  ScenarioSpec spec = square_spec(1.0, 3);
  spec.domain = {{0, 10}, {0, 15}};
  spec.resolution = equalized_resolution(spec.domain, 31);
  EXPECT_EQ(spec.resolution, (std::vector<std::size_t>{21, 31}));
  spec.t_end = 10.0;
  const double times[] = {10.0};
  const auto f = run_scenario(spec, times).snapshots.front();
  // Compare the two centre lines: along psi1 at the middle psi2 row and vice versa.
  double diff = 0.0;
  const std::size_t n = std::min(f.extents[0], f.extents[1]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const std::size_t a[] = {i, f.extents[1] / 2};
    const std::size_t b[] = {f.extents[0] / 2, i};
    diff = std::max(diff, std::abs(f.at(a) - f.at(b)));
  }
  EXPECT_GT(diff, 1.0);
}

TEST(Scenario, JsonSpecRoundTrip) {
  const auto j = nlohmann::json::parse(R"({
    "domain": [[0, 2], [0, 1]], "resolution": [21, 11],
    "boundary": "s*t + psi1", "initial": "psi1", "s": 2, "t_end": 0.5, "dt": "auto"})");
  const auto spec = scenario_from_json(j);
  EXPECT_EQ(spec.resolution, (std::vector<std::size_t>{21, 11}));
  EXPECT_FALSE(spec.dt.has_value());
  const double x[] = {1.5, 0.2};
  EXPECT_DOUBLE_EQ(spec.boundary(x, 3.0), 7.5);
  EXPECT_DOUBLE_EQ(spec.initial(x), 1.5);
  const auto back = scenario_to_json(spec);
  EXPECT_EQ(back["boundary"], "s*t + psi1");
  EXPECT_EQ(back["dt"], "auto");
  EXPECT_EQ(scenario_from_json(back).resolution, spec.resolution);
}

TEST(Scenario, JsonErrors) {
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"domain": [[0, 1]]})")), ValidationError);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(
                   R"({"domain": [[0, 1]], "resolution": [2], "t_end": 1})")),
               InvalidArgument);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(
                   R"({"domain": [[0, 1]], "resolution": [5], "t_end": 1, "boundary": "q*t"})")),
               InvalidArgument);
}

TEST(Export, CsvLayoutAndNormalizedColumn) {
  auto spec = square_spec(1.0, 3);
  spec.t_end = 0.01;
  const double times[] = {0.0, 0.01};
  const auto run = run_scenario(spec, times);
  std::ostringstream os;
  write_fields_csv(os, run.snapshots, 10.0);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,psi1,psi2,value,normalized");
  std::getline(in, line);
  EXPECT_EQ(line, "0,0,0,0,");
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 18u);
}

TEST(Export, FieldJsonRoundTrip) {
  const auto f = initial_field(square_spec(2.0, 5));
  const auto g = field_from_json(nlohmann::json::parse(field_to_json(f).dump()));
  EXPECT_EQ(g.values, f.values);
  EXPECT_EQ(g.extents, f.extents);
  EXPECT_EQ(g.spacings, f.spacings);
}
