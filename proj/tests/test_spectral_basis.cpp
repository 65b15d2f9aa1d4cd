#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nullctl/error.hpp"
#include "nullctl/spectral_basis.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace nullctl;
using namespace nullctl::spectral;

namespace {

DensitySpec two_piece() { return DensitySpec::piecewise({{{0.0, 0.5}, 1.0}, {{0.5, 1.0}, 4.0}}); }

// rho = 1 then 4: matching sin(wx) with B sin(2w(1-x)) at 1/2 gives
// sin(w/2) = 0 or cos w = -1/3
std::vector<double> two_piece_exact(int count) {
  const double a = std::acos(-1.0 / 3.0);
  std::vector<double> w;
  for (int m = 0; static_cast<int>(w.size()) < 3 * count; ++m) {
    w.push_back(a + 2.0 * std::numbers::pi * m);
    w.push_back(2.0 * std::numbers::pi * (m + 1) - a);
    w.push_back(2.0 * std::numbers::pi * (m + 1));
  }
  std::sort(w.begin(), w.end());
  w.resize(count);
  return w;
}

}  // namespace

TEST_CASE("sine basis") {
  const auto b = sine_basis(3);
  REQUIRE(b.size() == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(b.omega(j) == doctest::Approx((j + 1) * std::numbers::pi));
    CHECK(std::abs(b(j, 0.0)) <= 1e-10);
    CHECK(std::abs(b(j, 1.0)) <= 1e-10);
    CHECK(b(j, 0.3) == doctest::Approx(std::numbers::sqrt2 * std::sin((j + 1) * std::numbers::pi * 0.3)));
    for (int k = 0; k < 3; ++k) {
      CHECK(weighted_inner(b, j, k) == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(sine_basis(0), ValidationError);
}

TEST_CASE("constant densities") {
  const auto b4 = sturm_liouville_basis(DensitySpec::constant(4.0), 8);
  for (int j = 0; j < 8; ++j) {
    CHECK(b4.omega(j) == doctest::Approx((j + 1) * std::numbers::pi / 2.0).epsilon(1e-12));
    CHECK(b4(j, 0.37) ==
          doctest::Approx(std::sin((j + 1) * std::numbers::pi * 0.37) / std::numbers::sqrt2).epsilon(1e-9));
  }
  const auto b1 = sturm_liouville_basis(DensitySpec::constant(1.0), 12);
  const auto s = sine_basis(12);
  for (int j = 0; j < 12; ++j) {
    CHECK(std::abs(b1.omega(j) - s.omega(j)) <= 1e-10);
    for (double x : {0.1, 0.5, 0.77}) CHECK(std::abs(b1(j, x) - s(j, x)) <= 1e-10);
  }
}

TEST_CASE("two-piece density matches the closed-form and finite-difference oracles") {
  const auto b = sturm_liouville_basis(two_piece(), 10);
  const auto exact = two_piece_exact(10);
  const auto fd = oracle::richardson_frequencies(two_piece(), 4096, 10);
  for (int j = 0; j < 10; ++j) {
    CHECK(std::abs(b.omega(j) - exact[j]) <= 1e-11 * exact[j]);
    CHECK(std::abs(b.omega(j) - fd[j]) <= 1e-6 * fd[j]);
    CHECK(b.pairs[j].interior_zeros() == j);
    CHECK(std::abs(b(j, 0.0)) <= 1e-10);
    CHECK(std::abs(b(j, 1.0)) <= 1e-10);
    CHECK(b.pairs[j].norm_check == doctest::Approx(1.0).epsilon(1e-10));
    for (int k = 0; k < j; ++k) CHECK(std::abs(weighted_inner(b, j, k)) <= 1e-8);
  }
}

TEST_CASE("modes are continuous with continuous slope at interfaces") {
  const auto rho = DensitySpec::piecewise({{{0.0, 0.2}, 0.5}, {{0.2, 0.7}, 2.0}, {{0.7, 1.0}, 1.3}});
  const auto b = sturm_liouville_basis(rho, 6);
  for (std::size_t j = 0; j < b.size(); ++j) {
    for (double x : {0.2, 0.7}) {
      CHECK(std::abs(b(j, x - 1e-12) - b(j, x + 1e-12)) <= 1e-9);
      CHECK(std::abs(b.pairs[j].derivative(x - 1e-12) - b.pairs[j].derivative(x + 1e-12)) <=
            1e-8 * b.omega(j));
    }
  }
}

TEST_CASE("random piecewise densities: oscillation, orthonormality, Weyl bound, scaling") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(u(rng) * 5);
    std::vector<double> cuts{0.0};
    for (int i = 1; i < n; ++i) cuts.push_back(u(rng));
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    std::vector<DensityPiece> pieces;
    std::vector<DensityPiece> scaled;
    for (int i = 0; i < n; ++i) {
      if (cuts[i + 1] - cuts[i] < 1e-3) continue;
      const double v = 0.25 + 0.75 * u(rng);
      pieces.push_back({{cuts[i], cuts[i + 1]}, v});
      scaled.push_back({{cuts[i], cuts[i + 1]}, 4.0 * v});
    }
    pieces.front().span.lo = 0.0;
    scaled.front().span.lo = 0.0;
    for (std::size_t i = 1; i < pieces.size(); ++i) {
      pieces[i].span.lo = pieces[i - 1].span.hi;
      scaled[i].span.lo = scaled[i - 1].span.hi;
    }
    pieces.back().span.hi = 1.0;
    scaled.back().span.hi = 1.0;
    const auto rho = DensitySpec::piecewise(pieces, 0.25);
    const auto b = sturm_liouville_basis(rho, 12);
    const auto b4 = sturm_liouville_basis(DensitySpec::piecewise(scaled, 0.25), 12);
    for (std::size_t j = 0; j < b.size(); ++j) {
      CHECK(b.pairs[j].interior_zeros() == static_cast<int>(j));
      CHECK(b.pairs[j].norm_check == doctest::Approx(1.0).epsilon(1e-8));
      if (j > 0) CHECK(b.omega(j) > b.omega(j - 1));
      for (std::size_t k = 0; k < j; ++k) CHECK(std::abs(weighted_inner(b, j, k)) <= 1e-8);
      CHECK(b4.omega(j) == doctest::Approx(b.omega(j) / 2.0).epsilon(1e-11));
    }
    const double c = std::sqrt(rho.max_value()) / std::numbers::pi + 1.0;
    for (double mu = 0.0; mu <= b.omega(b.size() - 1); mu += 0.37) CHECK(count_below(b, mu) <= c * mu);
  }
}

TEST_CASE("count below") {
  const auto s = sine_basis(40);
  CHECK(count_below(s, 10.0) == 3);
  CHECK(count_below(s, 3.0) == 0);
  CHECK_THROWS_AS(count_below(s, 1000.0), SpectrumRangeError);
  const auto b4 = sturm_liouville_basis(DensitySpec::constant(4.0), 10);
  CHECK(count_below(b4, 10.0) == 6);
}

TEST_CASE("density validation") {
  CHECK_THROWS_AS(DensitySpec::piecewise({{{0.0, 0.4}, 1.0}, {{0.5, 1.0}, 1.0}}), ValidationError);
  CHECK_THROWS_AS(DensitySpec::piecewise({{{0.0, 1.0}, 5.0}}, 0.5), ValidationError);
  CHECK_THROWS_AS(DensitySpec::constant(-1.0), ValidationError);
}
