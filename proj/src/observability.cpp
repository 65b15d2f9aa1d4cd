#include "nullctl/observability.hpp"

#include "nullctl/csv.hpp"
#include "nullctl/error.hpp"
#include "nullctl/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace nullctl::observability {

namespace {

bool is_sine_basis(const spectral::Basis& basis) {
  if (basis.density.pieces.size() != 1 || basis.density.pieces[0].value != 1.0) return false;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const auto& p = basis.pairs[j].pieces;
    if (p.size() != 1 || p[0].a != 0.0 || p[0].b != std::numbers::sqrt2 ||
        basis.omega(j) != (j + 1) * std::numbers::pi) {
      return false;
    }
  }
  return true;
}

// int_a^b 2 sin(j pi x) sin(k pi x) dx
HighReal sine_entry(int j, int k, const sets::MeasurableSet1D& omega_set) {
  const HighReal pi = high_pi();
  HighReal total = 0;
  for (const sets::Interval& iv : omega_set.intervals()) {
    const HighReal a = iv.lo;
    const HighReal b = iv.hi;
    const HighReal plus = (j + k) * pi;
    HighReal part = -(sin(plus * b) - sin(plus * a)) / plus;
    if (j == k) {
      part += b - a;
    } else {
      const HighReal minus = (j - k) * pi;
      part += (sin(minus * b) - sin(minus * a)) / minus;
    }
    total += part;
  }
  return total;
}

double quadrature_entry(const spectral::Basis& basis, std::size_t j, std::size_t k,
                        const sets::MeasurableSet1D& omega_set) {
  using boost::math::quadrature::gauss_kronrod;
  const auto& ej = basis.pairs[j];
  const auto& ek = basis.pairs[k];
  auto f = [&](double x) { return ej(x) * ek(x); };
  double total = 0.0;
  for (const sets::Interval& iv : omega_set.intervals()) {
    // split at density interfaces and into pieces of a few oscillations
    std::vector<double> cuts{iv.lo};
    for (const auto& p : basis.density.pieces) {
      if (p.span.hi > iv.lo && p.span.hi < iv.hi) cuts.push_back(p.span.hi);
    }
    cuts.push_back(iv.hi);
    const double kmax = (ej.omega + ek.omega) * std::sqrt(basis.density.max_value());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const int chunks = 1 + static_cast<int>(kmax * (cuts[c + 1] - cuts[c]) / 4.0);
      const double h = (cuts[c + 1] - cuts[c]) / chunks;
      for (int s = 0; s < chunks; ++s) {
        const double lo = cuts[c] + s * h;
        const double hi = s + 1 == chunks ? cuts[c + 1] : lo + h;
        double error = 0.0;
        total += gauss_kronrod<double, 61>::integrate(f, lo, hi, 0, 0.0, &error);
        if (error > 1e-12 / chunks) {
          std::ostringstream os;
          os << "Gram quadrature did not converge for modes " << j + 1 << ", " << k + 1;
          throw NumericalError(os.str());
        }
      }
    }
  }
  return total;
}

HighMatrix assemble_gram(const spectral::Basis& basis, const sets::MeasurableSet1D& omega_set,
                         const std::vector<std::size_t>& modes, GramMethod method) {
  if (!(measure(omega_set) > 0.0)) throw ValidationError("spatial_gram needs |omega| > 0");
  if (omega_set.ambient().lo < 0.0 || omega_set.ambient().hi > 1.0) {
    throw ValidationError("spatial_gram needs omega inside [0,1]");
  }
  const bool sine = is_sine_basis(basis);
  if (method == GramMethod::closed_form && !sine) {
    throw ValidationError("closed-form Gram entries exist only for the sine basis");
  }
  const bool closed = method == GramMethod::closed_form || (method == GramMethod::automatic && sine);
  const std::size_t n = modes.size();
  HighMatrix g(n, n);
  parallel_for(n, [&](std::size_t r) {
    for (std::size_t c = 0; c <= r; ++c) {
      HighReal v = closed ? sine_entry(static_cast<int>(modes[r] + 1), static_cast<int>(modes[c] + 1), omega_set)
                          : HighReal(quadrature_entry(basis, modes[r], modes[c], omega_set));
      g(r, c) = v;
      g(c, r) = v;
    }
  });
  return g;
}

RateFit least_squares(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() < 3) throw ValidationError("fit_rate needs at least three points");
  const double n = static_cast<double>(xy.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : xy) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit_rate: degenerate fit (all mu equal)");
  RateFit fit;
  fit.N = sxy / sxx;
  fit.intercept = my - fit.N * mx;
  double sse = 0.0;
  for (const auto& [x, y] : xy) {
    const double r = y - (fit.N * x + fit.intercept);
    fit.residual = std::max(fit.residual, std::abs(r));
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

}  // namespace

double ExtendedFunction::operator()(double x, double y) const {
  if (!basis) throw ValidationError("ExtendedFunction without a basis");
  const std::size_t n = coefficients.a.size();
  if (coefficients.b.size() != n || n > basis->size()) {
    throw ValidationError("ExtendedFunction: coefficient lengths do not match the modes");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = basis->omega(j);
    acc += (coefficients.a[j] * std::exp(w * y) + coefficients.b[j] * std::exp(-w * y)) * (*basis)(j, x);
  }
  return acc;
}

Eigen::MatrixXd QuadraticForm::to_double() const {
  Eigen::MatrixXd out(matrix.rows(), matrix.cols());
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) out(r, c) = nullctl::to_double(matrix(r, c));
  }
  return out;
}

std::size_t modes_below(const spectral::Basis& basis, double mu) {
  if (!(mu >= 0.0)) throw ValidationError("mu must be >= 0");
  if (basis.size() == 0 || mu * (1.0 - 1e-12) > basis.omega(basis.size() - 1)) {
    throw SpectrumRangeError("mu exceeds the computed spectrum; raise the number of modes");
  }
  std::size_t n = 0;
  while (n < basis.size() && basis.omega(n) <= mu * (1.0 + 1e-12)) ++n;
  return n;
}

QuadraticForm spatial_gram(const spectral::Basis& basis, const sets::MeasurableSet1D& omega_set, double mu,
                           GramMethod method) {
  const std::size_t n = modes_below(basis, mu);
  if (n == 0) throw ValidationError("spatial_gram: no modes below mu");
  std::vector<std::size_t> modes(n);
  for (std::size_t j = 0; j < n; ++j) modes[j] = j;
  QuadraticForm form = spatial_gram(basis, omega_set, std::move(modes), method);
  form.mu = mu;
  return form;
}

QuadraticForm spatial_gram(const spectral::Basis& basis, const sets::MeasurableSet1D& omega_set,
                           std::vector<std::size_t> modes, GramMethod method) {
  if (modes.empty()) throw ValidationError("spatial_gram needs at least one mode");
  for (std::size_t m : modes) {
    if (m >= basis.size()) throw ValidationError("spatial_gram: mode index out of range");
  }
  QuadraticForm form;
  form.layout = QuadraticForm::Layout::spatial;
  form.matrix = assemble_gram(basis, omega_set, modes, method);
  form.mu = basis.omega(modes.back());
  form.modes = std::move(modes);
  return form;
}

SpectralConstant spectral_constant(const QuadraticForm& form) {
  const HighMatrix& g = form.matrix;
  if (g.rows() == 0 || g.rows() != g.cols()) throw ValidationError("spectral_constant needs a square form");
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < r; ++c) {
      if (abs(g(r, c) - g(c, r)) > HighReal(1e-12) * (abs(g(r, c)) + 1)) {
        throw ValidationError("spectral_constant needs a symmetric form");
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<HighMatrix> solver(g);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolve failed");
  const HighReal lmin = solver.eigenvalues()(0);
  const HighReal lmax = solver.eigenvalues()(g.rows() - 1);
  const HighReal floor = HighReal(1e-150) * (lmax > 1 ? lmax : HighReal(1));
  if (!(lmin > floor)) {
    std::ostringstream os;
    os << "smallest eigenvalue " << nullctl::to_double(lmin) << " is not resolvably positive";
    throw UnobservableModes(os.str());
  }
  const HighVector v = solver.eigenvectors().col(0);
  SpectralConstant out;
  out.lambda_min = nullctl::to_double(lmin);
  out.logC = -nullctl::to_double(log(lmin));
  out.C = std::exp(out.logC);
  out.residual = nullctl::to_double((g * v - lmin * v).norm());
  if (out.residual > 1e-10) throw NumericalError("eigenpair residual above 1e-10");
  return out;
}

HighReal y_integral(const HighReal& s) {
  if (s == 0) return HighReal(0.5);
  return (exp(HighReal(0.75) * s) - exp(HighReal(0.25) * s)) / s;
}

QuadraticForm lr_form(const spectral::Basis& basis, const sets::MeasurableSet1D& omega_set, double mu) {
  const QuadraticForm g = spatial_gram(basis, omega_set, mu);
  const std::size_t n = g.n_modes();
  std::vector<HighReal> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = HighReal(basis.omega(g.modes[j]));
  QuadraticForm form;
  form.layout = QuadraticForm::Layout::two_sided;
  form.modes = g.modes;
  form.mu = mu;
  form.matrix.resize(2 * n, 2 * n);
  parallel_for(n, [&](std::size_t j) {
    for (std::size_t k = 0; k < n; ++k) {
      const HighReal& gjk = g.matrix(j, k);
      form.matrix(j, k) = gjk * y_integral(w[j] + w[k]);
      form.matrix(j, n + k) = gjk * y_integral(w[j] - w[k]);
      form.matrix(n + j, k) = gjk * y_integral(w[k] - w[j]);
      form.matrix(n + j, n + k) = gjk * y_integral(-w[j] - w[k]);
    }
  });
  return form;
}

SinhFloor sinh_floor_check(double omega, double a, double b, double omega1, double mu) {
  if (!(omega1 > 0.0 && omega1 <= omega && omega <= mu)) {
    throw ValidationError("sinh_floor_check needs 0 < w1 <= w <= mu");
  }
  const double t = 2.0 * omega;
  SinhFloor out;
  out.lhs = a * a * std::expm1(t) / t + 2.0 * a * b - b * b * std::expm1(-t) / t;
  out.rhs = std::exp(-mu) * (std::sinh(omega1) / omega1 - 1.0) * (a * a + b * b);
  out.holds = out.lhs >= out.rhs;
  return out;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> logs;
  logs.reserve(points.size());
  for (const auto& [mu, c] : points) {
    if (!(c > 0.0)) throw ValidationError("fit_rate needs C > 0");
    logs.emplace_back(mu, std::log(c));
  }
  return least_squares(logs);
}

RateFit fit_log_rate(const std::vector<std::pair<double, double>>& points) { return least_squares(points); }

std::vector<SpectralRow> spectral_sweep(const spectral::Basis& basis, const sets::MeasurableSet1D& omega_set,
                                        const std::vector<double>& mu_list) {
  std::vector<SpectralRow> rows;
  rows.reserve(mu_list.size());
  for (double mu : mu_list) {
    const QuadraticForm g = spatial_gram(basis, omega_set, mu);
    const SpectralConstant c = spectral_constant(g);
    rows.push_back({mu, g.n_modes(), c.lambda_min, c.C, c.logC});
  }
  return rows;
}

void write_spectral_csv(std::ostream& out, const std::vector<SpectralRow>& rows) {
  out << "mu,n_modes,lambda_min,C,logC\n";
  for (const SpectralRow& r : rows) {
    csv::write_row(out, {r.mu, static_cast<long long>(r.n_modes), r.lambda_min, r.C, r.logC});
  }
}

}  // namespace nullctl::observability
