#pragma once

// Quadratic forms behind the spectral inequalities: the spatial Gram of the
// low modes on a control set, its two-sided extension over y in [1/4, 3/4],
// their smallest eigenvalues, and a log-linear fit of the resulting constants.

#include "nullctl/high_precision.hpp"
#include "nullctl/sets.hpp"
#include "nullctl/spectral_basis.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace nullctl::observability {

struct ModeCoefficients {
  std::vector<double> a;
  std::vector<double> b;
};

/// u(x,y) = sum_j (a_j e^{w_j y} + b_j e^{-w_j y}) e_j(x) over modes w_j <= mu
struct ExtendedFunction {
  const spectral::Basis* basis = nullptr;
  ModeCoefficients coefficients;
  double mu = 0.0;

  double operator()(double x, double y) const;
};

struct QuadraticForm {
  enum class Layout { spatial, two_sided };

  HighMatrix matrix;
  Layout layout = Layout::spatial;
  std::vector<std::size_t> modes;  // basis indices, ascending
  double mu = 0.0;

  std::size_t n_modes() const { return modes.size(); }
  Eigen::MatrixXd to_double() const;
};

enum class GramMethod { automatic, closed_form, quadrature };

/// Number of basis modes with w_j <= mu (relative slack 1e-12). Throws
/// SpectrumRangeError when mu reaches past the computed spectrum.
std::size_t modes_below(const spectral::Basis& basis, double mu);

/// G_jk = int_omega e_j e_k dx over the modes w_j <= mu. Closed form in
/// extended precision for the sine basis; adaptive Gauss-Kronrod otherwise
/// (absolute tolerance 1e-12 per entry, NumericalError if not met).
QuadraticForm spatial_gram(const spectral::Basis& basis, const sets::MeasurableSet1D& omega_set, double mu,
                           GramMethod method = GramMethod::automatic);

/// Same for an explicit list of basis indices.
QuadraticForm spatial_gram(const spectral::Basis& basis, const sets::MeasurableSet1D& omega_set,
                           std::vector<std::size_t> modes, GramMethod method = GramMethod::automatic);

struct SpectralConstant {
  double lambda_min = 0.0;
  double C = 0.0;
  double logC = 0.0;
  double residual = 0.0;  // ||G v - lambda v|| for the unit eigenvector
};

/// Smallest eigenvalue of the form and C = 1/lambda_min. Throws
/// UnobservableModes when lambda_min is not resolvably positive.
SpectralConstant spectral_constant(const QuadraticForm& form);

/// int int_{omega x [1/4,3/4]} |u|^2 as a form over (a, b): blocks
/// G_jk I(+-w_j +- w_k) with I(s) = int_{1/4}^{3/4} e^{s y} dy, I(0) = 1/2.
QuadraticForm lr_form(const spectral::Basis& basis, const sets::MeasurableSet1D& omega_set, double mu);

/// int_{1/4}^{3/4} e^{s y} dy
HighReal y_integral(const HighReal& s);

struct SinhFloor {
  double lhs = 0.0;  // int_0^1 (a e^{wy} + b e^{-wy})^2 dy
  double rhs = 0.0;  // e^{-mu} (sinh(w1)/w1 - 1)(a^2 + b^2)
  bool holds = false;
};

/// Requires 0 < w1 <= w <= mu.
SinhFloor sinh_floor_check(double omega, double a, double b, double omega1, double mu);

struct RateFit {
  double N = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // max |log C - (N mu + intercept)|
  double r_squared = 0.0;
};

/// Least-squares line through (mu, log C). Needs at least three points with
/// C > 0 and two distinct mu.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

/// Same from (mu, log C) pairs, for constants beyond double range.
RateFit fit_log_rate(const std::vector<std::pair<double, double>>& points);

struct SpectralRow {
  double mu = 0.0;
  std::size_t n_modes = 0;
  double lambda_min = 0.0;
  double C = 0.0;
  double logC = 0.0;
};

/// One spatial Gram and constant per mu.
std::vector<SpectralRow> spectral_sweep(const spectral::Basis& basis, const sets::MeasurableSet1D& omega_set,
                                        const std::vector<double>& mu_list);

/// Header mu,n_modes,lambda_min,C,logC then one row per entry.
void write_spectral_csv(std::ostream& out, const std::vector<SpectralRow>& rows);

}  // namespace nullctl::observability
