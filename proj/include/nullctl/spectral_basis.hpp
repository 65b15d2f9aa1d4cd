#pragma once

// Dirichlet eigenpairs on (0,1) of e'' + rho(x) w^2 e = 0 for piecewise-constant
// rho. Modes are kept in closed form, one cos/sin pair per density piece.

#include "nullctl/sets.hpp"

#include <vector>

namespace nullctl::spectral {

struct DensityPiece {
  sets::Interval span;
  double value = 1.0;
};

struct DensitySpec {
  enum class Kind { constant, piecewise_constant };

  Kind kind = Kind::constant;
  std::vector<DensityPiece> pieces{{{0.0, 1.0}, 1.0}};
  /// values must lie in [delta, 1/delta]
  double delta = 1.0;

  static DensitySpec constant(double value);
  /// delta <= 0 takes the tightest admissible value min(min rho, 1/max rho).
  static DensitySpec piecewise(std::vector<DensityPiece> pieces, double delta = 0.0);

  /// Throws ValidationError unless the pieces partition [0,1] (at most 64 of
  /// them) with values in [delta, 1/delta].
  void validate() const;
  double operator()(double x) const;
  double max_value() const;
};

inline constexpr int kMaxDensityPieces = 64;

/// On piece i: e(x) = a_i cos(k_i (x - lo_i)) + b_i sin(k_i (x - lo_i)),
/// k_i = w sqrt(rho_i).
struct ModePiece {
  double lo = 0.0;
  double hi = 1.0;
  double k = 0.0;
  double a = 0.0;
  double b = 0.0;
};

struct EigenPair {
  double omega = 0.0;
  std::vector<ModePiece> pieces;
  /// independent quadrature value of the weighted norm (should be 1)
  double norm_check = 1.0;

  double operator()(double x) const;
  double derivative(double x) const;
  /// sign changes in (0,1), read off the phase of each piece
  int interior_zeros() const;
};

struct Basis {
  DensitySpec density;
  std::vector<EigenPair> pairs;

  std::size_t size() const { return pairs.size(); }
  double omega(std::size_t j) const { return pairs[j].omega; }
  double operator()(std::size_t j, double x) const { return pairs[j](x); }
};

/// w_j = j pi, e_j = sqrt2 sin(j pi x), j = 1..J.
Basis sine_basis(int J);

/// First J eigenpairs by shooting with exact transfer matrices. Roots of the
/// secular function are bracketed on a grid of step pi delta / 4 and bisected;
/// a mode with the wrong number of interior zeros triggers a rescan at half the
/// step, then NumericalError.
Basis sturm_liouville_basis(const DensitySpec& rho, int J);

/// phi(w): value at x = 1 of the solution with (e, e') = (0, 1) at x = 0.
double secular_function(const DensitySpec& rho, double omega);

/// #{j : w_j <= mu}. Throws SpectrumRangeError when mu exceeds the largest
/// computed frequency.
int count_below(const Basis& basis, double mu);

/// int_0^1 rho e_j e_k dx by Gauss-Legendre on every density piece.
double weighted_inner(const Basis& basis, std::size_t j, std::size_t k);

}  // namespace nullctl::spectral
