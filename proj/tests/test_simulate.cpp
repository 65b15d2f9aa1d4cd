#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nullctl/control.hpp"
#include "nullctl/error.hpp"
#include "nullctl/simulate.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace nullctl;
using namespace nullctl::simulate;
using control::HeatState;
using sets::MeasurableSet1D;

namespace {

const double kPi = std::numbers::pi;

MeasurableSet1D three_pieces() { return MeasurableSet1D({{0.1, 0.15}, {0.4, 0.5}, {0.8, 0.85}}); }

}  // namespace

TEST_CASE("exact propagation: pure decay and identity") {
  const auto basis = spectral::sine_basis(3);
  const HeatState s{0.0, {1.0, 0.0, 0.0}};
  const HeatState e = propagate_exact(basis, s, nullptr, 0.0, 1.0 / (kPi * kPi));
  CHECK(e.alpha[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  const HeatState same = propagate_exact(basis, HeatState{0.0, {0.3, -0.2, 0.1}}, nullptr, 0.5, 0.5);
  CHECK(same.alpha == std::vector<double>{0.3, -0.2, 0.1});
  CHECK_THROWS_AS(propagate_exact(basis, s, nullptr, 1.0, 0.5), ValidationError);
}

TEST_CASE("exact propagation composes and matches the stage control end state") {
  const auto basis = spectral::sine_basis(12);
  const HeatState u0 = control::random_state(12, 11);
  const auto run = control::synthesize(u0, basis, three_pieces(), 1.0, 4 * kPi, 2, 0);
  const auto& p = run.control.schedule.stages[0];
  const HeatState mid = propagate_exact(basis, u0, &run.control, 0.0, 0.1);
  const HeatState two = propagate_exact(basis, mid, &run.control, 0.1, p.active_end);
  const HeatState one = propagate_exact(basis, u0, &run.control, 0.0, p.active_end);
  for (std::size_t j = 0; j < 12; ++j) CHECK(std::abs(two.alpha[j] - one.alpha[j]) <= 1e-12);
  for (std::size_t j = 0; j < p.mode_count; ++j) CHECK(std::abs(one.alpha[j]) <= 1e-10);

  const HeatState a = propagate_exact(basis, one, &run.control, p.active_end, 0.4);
  const HeatState b = propagate_exact(basis, a, &run.control, 0.4, p.t_end);
  const HeatState c = propagate_exact(basis, one, &run.control, p.active_end, p.t_end);
  for (std::size_t j = 0; j < 12; ++j) CHECK(std::abs(b.alpha[j] - c.alpha[j]) <= 1e-12);

  CHECK_THROWS_AS(propagate_exact(basis, u0, &run.control, 0.1, 0.3), ValidationError);

  // single-mode span reproduces the scalar stage example
  const auto b1 = spectral::sine_basis(1);
  const auto ex = control::synthesize(HeatState{0.0, {1.0}}, b1, MeasurableSet1D({{0.0, 1.0}}), 0.4, kPi, 1, 0);
  const HeatState end = propagate_exact(b1, HeatState{0.0, {1.0}}, &ex.control, 0.0, 0.1);
  CHECK(std::abs(end.alpha[0]) <= 1e-10);
  CHECK(to_double(ex.control.coefficients[0](0)) == doctest::Approx(-8.543784662073495).epsilon(1e-12));
}

TEST_CASE("crank-nicolson: zero data, norm decay, discrete sine modes") {
  const std::size_t n = 63;
  const auto rho = spectral::DensitySpec::constant(1.0);
  const std::vector<char> none(n, 0);
  const GridState zero = crank_nicolson(GridState::zeros(n), rho, none, Source{}, 1e-3, 50);
  for (double v : zero.values) CHECK(v == 0.0);

  std::mt19937_64 rng(13);
  std::normal_distribution<double> nd;
  GridState g = GridState::zeros(n);
  for (double& v : g.values) v = nd(rng);
  double prev = g.l2_norm();
  for (int s = 0; s < 30; ++s) {
    g = crank_nicolson(g, rho, none, Source{}, 1e-3, 1);
    CHECK(g.l2_norm() <= prev);
    prev = g.l2_norm();
  }

  const double dt = 2e-3;
  for (int k : {1, 5, 40}) {
    GridState m = GridState::zeros(n);
    for (std::size_t i = 0; i < n; ++i) m.values[i] = std::sin(k * kPi * m.x(i));
    const double lam = 4.0 / (m.dx * m.dx) * std::pow(std::sin(k * kPi * m.dx / 2.0), 2);
    const double gain = (1.0 - 0.5 * dt * lam) / (1.0 + 0.5 * dt * lam);
    const GridState next = crank_nicolson(m, rho, none, Source{}, dt, 1);
    for (std::size_t i = 0; i < n; ++i) CHECK(next.values[i] == doctest::Approx(gain * m.values[i]).epsilon(1e-10));
  }
}

TEST_CASE("crank-nicolson source against a manufactured solution") {
  // u = sin(pi x) e^t solves u_t = u_xx + (1 + pi^2) sin(pi x) e^t
  const std::size_t n = 255;
  const auto rho = spectral::DensitySpec::constant(1.0);
  const std::vector<char> all(n, 1);
  GridState g = GridState::zeros(n);
  for (std::size_t i = 0; i < n; ++i) g.values[i] = std::sin(kPi * g.x(i));
  const double dx = g.dx;
  Source src = [&](double t, std::vector<double>& f) {
    for (std::size_t i = 0; i < n; ++i) f[i] = (1.0 + kPi * kPi) * std::sin(kPi * (i + 1) * dx) * std::exp(t);
  };
  const GridState end = crank_nicolson(g, rho, all, src, 1e-3, 200);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(end.values[i] - std::sin(kPi * end.x(i)) * std::exp(0.2)));
  CHECK(err <= 1e-4);
}

TEST_CASE("pure-decay benchmark converges at second order") {
  const auto b = decay_benchmark(512, 1e-4, 0.1);
  const double dx = 1.0 / 513.0;
  CHECK(b.error <= dx * dx + 1e-8);
  CHECK(b.ratio >= 3.5);
  CHECK(b.ratio <= 4.5);
  const auto coarse = decay_benchmark(127, 4e-4, 0.1);
  CHECK(coarse.ratio >= 3.5);
}

TEST_CASE("rasterized mask") {
  const auto r = rasterize(three_pieces(), 512);
  CHECK(std::abs(r.measure - 0.2) <= 3.0 * 2.0 / 513.0);
  const auto full = rasterize(MeasurableSet1D({{0.0, 1.0}}), 99);
  CHECK(full.measure == doctest::Approx(0.99));
}

TEST_CASE("cross-validation of a controlled run") {
  const auto basis = spectral::sine_basis(16);
  const HeatState u0 = control::random_state(16, 2024);
  const auto run = control::synthesize(u0, basis, three_pieces(), 1.0, 4 * kPi, 6, 0);
  const auto cv = cross_validate(run, u0, 512, 1e-4);
  CHECK(cv.distance <= 5.0 * cv.model_error);
  CHECK(cv.distance < cv.coarse_distance);
  CHECK(std::abs(cv.mask_measure - cv.set_measure) <= 6.0 / 513.0);

  const HeatState zero{0.0, std::vector<double>(16, 0.0)};
  const auto zrun = control::synthesize(zero, basis, three_pieces(), 1.0, 4 * kPi, 2, 0);
  CHECK(cross_validate(zrun, zero, 64, 1e-3).distance == 0.0);
}

TEST_CASE("piecewise density: scheme tracks the exact modal decay") {
  const auto rho = spectral::DensitySpec::piecewise({{{0.0, 0.5}, 1.0}, {{0.5, 1.0}, 4.0}});
  const auto basis = spectral::sturm_liouville_basis(rho, 3);
  const HeatState s{0.0, {1.0, 0.0, 0.0}};
  const HeatState e = propagate_exact(basis, s, nullptr, 0.0, 0.05);
  auto run = [&](std::size_t n, double dt) {
    const GridState g = sample(basis, s, n);
    const GridState end = crank_nicolson(g, rho, std::vector<char>(n, 0), Source{}, dt, static_cast<std::size_t>(std::llround(0.05 / dt)));
    const GridState ref = sample(basis, e, n);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(end.values[i] - ref.values[i]));
    return err;
  };
  const double coarse = run(255, 2e-4);
  const double fine = run(511, 1e-4);
  CHECK(fine <= 1e-3);
  CHECK(fine < coarse);
}

TEST_CASE("snapshot csv") {
  GridState g = GridState::zeros(3);
  g.values = {1.0, 2.0, 3.0};
  std::ostringstream os;
  write_snapshot_csv(os, g);
  CHECK(os.str() == "x,u\n0,0\n0.25,1\n0.5,2\n0.75,3\n1,0\n");
}
