#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nullctl/control.hpp"
#include "nullctl/error.hpp"
#include "nullctl/observability.hpp"
#include "nullctl/simulate.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace nullctl;
using namespace nullctl::control;
using sets::MeasurableSet1D;

namespace {

const double kPi = std::numbers::pi;

HighMatrix identity(std::size_t n) { return HighMatrix::Identity(n, n); }

MeasurableSet1D three_pieces() { return MeasurableSet1D({{0.1, 0.15}, {0.4, 0.5}, {0.8, 0.85}}); }

}  // namespace

TEST_CASE("dyadic schedule") {
  const Schedule s = make_schedule(1.0, kPi, 3);
  REQUIRE(s.stages.size() == 3);
  const double starts[] = {0.0, 0.5, 0.75};
  const double ends[] = {0.5, 0.75, 0.875};
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    CHECK(s.stages[k].t_start == starts[k]);
    CHECK(s.stages[k].t_end == ends[k]);
    CHECK(s.stages[k].active_end == 0.5 * (starts[k] + ends[k]));
    CHECK(s.stages[k].mu_k == kPi * (1 << k));
    total += s.stages[k].t_end - s.stages[k].t_start;
  }
  CHECK(s.tail.lo == 0.875);
  CHECK(s.tail.hi == 1.0);
  CHECK(total + s.tail.length() == 1.0);

  const Schedule one = make_schedule(1.0, kPi, 1);
  CHECK(one.stages[0].t_end == 0.5);
  CHECK(one.tail.lo == 0.5);

  const Schedule odd = make_schedule(0.3, 5.0, 7);
  CHECK(odd.stages.back().t_end + odd.tail.length() == doctest::Approx(0.3).epsilon(1e-15));
  for (std::size_t k = 1; k < odd.stages.size(); ++k) CHECK(odd.stages[k].t_start == odd.stages[k - 1].t_end);

  CHECK_THROWS_AS(make_schedule(0.0, kPi, 2), ValidationError);
  CHECK_THROWS_AS(make_schedule(1.0, kPi, 0), ValidationError);
  CHECK_THROWS_AS(make_schedule(1.0, kPi, 60), ValidationError);
}

TEST_CASE("stage gramian") {
  const auto basis = spectral::sine_basis(2);
  const HighMatrix lam = stage_gramian(basis, identity(2), 1, 0.1);
  CHECK(to_double(lam(0, 0)) == doctest::Approx((1.0 - std::exp(-2.0 * kPi * kPi * 0.1)) / (2.0 * kPi * kPi)));
  CHECK(to_double(lam(0, 0)) == doctest::Approx(0.04362).epsilon(1e-4));
  const HighMatrix two = stage_gramian(basis, identity(2), 2, 0.1);
  CHECK(two(0, 1) == 0);
  CHECK(two(1, 0) == 0);
  CHECK(to_double(two(1, 1)) == doctest::Approx((1.0 - std::exp(-8.0 * kPi * kPi * 0.1)) / (8.0 * kPi * kPi)));
  CHECK_THROWS_AS(stage_gramian(basis, identity(2), 3, 0.1), ValidationError);
  CHECK_THROWS_AS(stage_gramian(basis, identity(2), 1, 0.0), ValidationError);
}

TEST_CASE("stage gramian is positive semidefinite on random draws") {
  const auto basis = spectral::sine_basis(10);
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = 0.9 * u(rng);
    const double b = a + 0.02 + (0.98 - a) * u(rng) * 0.5;
    const MeasurableSet1D w({{a, std::min(b, 1.0)}});
    const std::size_t n = 1 + static_cast<std::size_t>(u(rng) * 9.99);
    std::vector<std::size_t> modes(n);
    for (std::size_t j = 0; j < n; ++j) modes[j] = j;
    const HighMatrix g = observability::spatial_gram(basis, w, modes).matrix;
    const HighMatrix lam = stage_gramian(basis, g, n, 0.01 + 0.3 * u(rng));
    Eigen::SelfAdjointEigenSolver<HighMatrix> eig(lam, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues()(0) >= 0);
  }
}

TEST_CASE("stage control closed forms") {
  const auto basis = spectral::sine_basis(1);
  StagePlan p{0.0, 0.2, 0.1, kPi, 1};
  HeatState s{0.0, {1.0}};
  const auto sol = stage_control(basis, identity(1), s, p);
  const double d = std::exp(-kPi * kPi * 0.1);
  CHECK(d == doctest::Approx(0.3727).epsilon(1e-4));
  CHECK(sol.d_norm == doctest::Approx(d));
  CHECK(to_double(sol.c(0)) == doctest::Approx(-8.543784662073495).epsilon(1e-12));
  CHECK(sol.cost == doctest::Approx(1.785).epsilon(1e-3));
  CHECK(sol.cost == doctest::Approx(d / std::sqrt((1.0 - d * d) / (2.0 * kPi * kPi))).epsilon(1e-14));
  CHECK(std::abs(to_double(sol.after_active(0))) <= 1e-10 * d);
  CHECK_FALSE(sol.regularized);

  const auto zero = stage_control(basis, identity(1), HeatState{0.0, {0.0}}, p);
  CHECK(zero.c(0) == 0);
  CHECK(zero.cost == 0.0);
  CHECK(std::isinf(zero.log_cost));
}

TEST_CASE("decoupled modes are controlled independently") {
  const auto basis = spectral::sine_basis(2);
  StagePlan p{0.0, 0.2, 0.1, 2 * kPi, 2};
  const auto both = stage_control(basis, identity(2), HeatState{0.0, {0.7, -1.3}}, p);
  p.mode_count = 1;
  const auto first = stage_control(basis, identity(2), HeatState{0.0, {0.7, 0.0}}, p);
  CHECK(to_double(both.c(0)) == doctest::Approx(to_double(first.c(0))).epsilon(1e-14));
  const double L = 0.1;
  const double w2 = 4 * kPi * kPi;
  const double lam = (1.0 - std::exp(-2 * w2 * L)) / (2 * w2);
  CHECK(to_double(both.c(1)) == doctest::Approx(1.3 * std::exp(-w2 * L) / lam).epsilon(1e-13));
}

TEST_CASE("single stage kills a single mode") {
  const auto basis = spectral::sine_basis(1);
  const auto run = synthesize(HeatState{0.0, {1.0}}, basis, MeasurableSet1D({{0.0, 1.0}}), 1.0, kPi, 1);
  CHECK(std::abs(run.final_state.alpha[0]) <= 1e-10);
  CHECK(run.stage_costs.size() == 1);

  // active length 0.1: the stage control example
  const auto ex = synthesize(HeatState{0.0, {1.0}}, basis, MeasurableSet1D({{0.0, 1.0}}), 0.4, kPi, 1);
  const auto rep = cost_audit(ex);
  CHECK(rep.N_eff == doctest::Approx(1.785).epsilon(1e-3));
  CHECK(rep.N_eff == doctest::Approx(ex.stage_costs[0]));
}

TEST_CASE("zero initial data") {
  const auto basis = spectral::sine_basis(8);
  const auto run = synthesize(HeatState{0.0, std::vector<double>(8, 0.0)}, basis, three_pieces(), 1.0, 4 * kPi, 3);
  CHECK(run.cost_total == 0.0);
  for (double c : run.stage_costs) CHECK(c == 0.0);
  CHECK(run.final_state.norm() == 0.0);
  const auto rep = cost_audit(run);
  CHECK(rep.N_eff == 0.0);
  CHECK_FALSE(rep.geometric_after_peak);
}

TEST_CASE("annihilation, free decay and passive energy decay") {
  const auto basis = spectral::sine_basis(24);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const HeatState u0 = random_state(24, seed);
    const auto run = synthesize(u0, basis, three_pieces(), 1.0, 4 * kPi, 4, 3);
    for (std::size_t k = 0; k < run.stage_costs.size(); ++k) {
      CHECK_FALSE(run.stage_regularized[k]);
    }
    // residuals are relative to |d|, recheck stage by stage
    HighVector state = to_high(u0);
    for (std::size_t k = 0; k < run.control.schedule.stages.size(); ++k) {
      const StagePlan& p = run.control.schedule.stages[k];
      const auto sol = stage_control(basis, run.control.gram, state, p);
      for (std::size_t i = 0; i < p.mode_count; ++i) {
        CHECK(abs(sol.after_active(i)) <= HighReal(1e-10) * HighReal(sol.d_norm));
      }
      state = simulate::propagate_exact(basis, sol.after_active, nullptr, p.active_end, p.t_end);
    }
    // passive samples never increase the norm
    for (std::size_t i = 1; i < run.trace.size(); ++i) {
      const TracePoint& a = run.trace[i - 1];
      const TracePoint& b = run.trace[i];
      const int s = a.stage;
      const bool passive = s >= static_cast<int>(run.control.schedule.stages.size()) ||
                           a.t >= run.control.schedule.stages[s].active_end;
      if (passive && b.t > a.t) CHECK(b.norm <= a.norm * (1.0 + 1e-15));
    }
  }
  const HeatState s = random_state(24, 9);
  const HeatState later = simulate::propagate_exact(basis, s, nullptr, 0.0, 0.013);
  for (std::size_t j = 0; j < 24; ++j) {
    const double w = basis.omega(j);
    CHECK(std::abs(later.alpha[j] - s.alpha[j] * std::exp(-w * w * 0.013)) <= 1e-12 * std::abs(s.alpha[j]));
  }
}

TEST_CASE("cost is homogeneous in the initial data") {
  const auto basis = spectral::sine_basis(16);
  const HeatState u0 = random_state(16, 77);
  HeatState scaled = u0;
  for (double& a : scaled.alpha) a *= -3.5;
  const auto r1 = synthesize(u0, basis, three_pieces(), 1.0, 4 * kPi, 3);
  const auto r2 = synthesize(scaled, basis, three_pieces(), 1.0, 4 * kPi, 3);
  for (std::size_t k = 0; k < r1.stage_costs.size(); ++k) {
    CHECK(r2.stage_costs[k] == doctest::Approx(3.5 * r1.stage_costs[k]).epsilon(1e-12));
    CHECK(r2.stage_log_costs[k] == doctest::Approx(r1.stage_log_costs[k] + std::log(3.5)).epsilon(1e-12));
  }
  CHECK(r2.cost_total == doctest::Approx(3.5 * r1.cost_total).epsilon(1e-12));
  CHECK(r2.ratio == doctest::Approx(r1.ratio).epsilon(1e-12));
}

TEST_CASE("enlarging the control set never raises the effective cost") {
  const auto basis = spectral::sine_basis(16);
  const std::vector<MeasurableSet1D> nested = {
      MeasurableSet1D({{0.4, 0.45}}), MeasurableSet1D({{0.375, 0.475}}), MeasurableSet1D({{0.325, 0.525}}),
      MeasurableSet1D({{0.225, 0.625}}), MeasurableSet1D({{0.025, 0.825}})};
  for (std::uint64_t seed = 3; seed <= 6; ++seed) {
    const HeatState u0 = random_state(16, seed);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& w : nested) {
      const double n_eff = cost_audit(synthesize(u0, basis, w, 1.0, 4 * kPi, 3)).N_eff;
      CHECK(n_eff <= prev);
      prev = n_eff;
    }
  }
}

TEST_CASE("truncation factor and trace csv") {
  const auto basis = spectral::sine_basis(16);
  const Schedule s = make_schedule(1.0, 4 * kPi, 6);
  const double w = 16 * kPi;
  CHECK(truncation_factor(basis, s) == doctest::Approx(std::exp(-w * w * 3.0 / 128.0)));
  CHECK(controlled_modes(basis, 4 * kPi) == 4);
  CHECK(controlled_modes(basis, 128 * kPi) == 16);

  const auto run = synthesize(random_state(16, 5), basis, three_pieces(), 1.0, 4 * kPi, 2, 1);
  std::ostringstream os;
  write_trace_csv(os, run.trace);
  const std::string text = os.str();
  CHECK(text.rfind("t,norm,stage,cumulative_cost\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == run.trace.size() + 1);
  // one start point, per stage 2 phases x (1 sample + 1 end), tail 1 sample + 1 end
  CHECK(run.trace.size() == 1 + 2 * 4 + 2);
  CHECK(run.trace.back().t == 1.0);
  CHECK(run.trace.back().cumulative_cost == doctest::Approx(run.cost_total));
}

TEST_CASE("synthesis input validation") {
  const auto basis = spectral::sine_basis(4);
  CHECK_THROWS_AS(synthesize(HeatState{0.0, {1.0}}, basis, three_pieces(), 1.0, 4 * kPi, 2), ValidationError);
  CHECK_THROWS_AS(synthesize(random_state(4, 1), basis, three_pieces(), 1.0, 1.0, 2), ValidationError);
  CHECK_THROWS_AS(random_state(0, 1), ValidationError);
}
