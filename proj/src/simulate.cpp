#include "nullctl/simulate.hpp"

#include "nullctl/csv.hpp"
#include "nullctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace nullctl::simulate {

namespace {

constexpr double kSpanTol = 1e-12;

using control::ControlFunction;
using control::HeatState;

// Active stage index when [t0, t1] lies inside an active phase, -1 when it
// lies inside a passive phase or the tail; throws when it straddles.
int phase_of(const ControlFunction& c, double t0, double t1) {
  const double tol = kSpanTol * std::max(1.0, c.schedule.T);
  for (std::size_t k = 0; k < c.schedule.stages.size(); ++k) {
    const control::StagePlan& p = c.schedule.stages[k];
    if (t0 >= p.t_start - tol && t1 <= p.active_end + tol) return static_cast<int>(k);
    if (t0 >= p.active_end - tol && t1 <= p.t_end + tol) return -1;
  }
  if (t0 >= c.schedule.tail.lo - tol && t1 <= c.schedule.tail.hi + tol) return -1;
  throw ValidationError("propagate_exact: span straddles a phase boundary");
}

// Thomas algorithm for a constant symmetric tridiagonal matrix with
// diagonal `diag` and off-diagonal `off`.
struct Tridiagonal {
  std::vector<double> diag;
  double off = 0.0;
  std::vector<double> cprime;
  std::vector<double> denom;

  void factor() {
    const std::size_t n = diag.size();
    cprime.assign(n, 0.0);
    denom.assign(n, 0.0);
    denom[0] = diag[0];
    cprime[0] = off / denom[0];
    for (std::size_t i = 1; i < n; ++i) {
      denom[i] = diag[i] - off * cprime[i - 1];
      cprime[i] = off / denom[i];
    }
  }

  void solve(std::vector<double>& rhs) const {
    const std::size_t n = diag.size();
    rhs[0] /= denom[0];
    for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom[i];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cprime[i] * rhs[i + 1];
  }
};

double l2_distance(const GridState& a, const GridState& b) {
  if (a.n_points != b.n_points) throw ValidationError("l2_distance: grids differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.n_points; ++i) {
    const double d = a.values[i] - b.values[i];
    acc += d * d;
  }
  return std::sqrt(a.dx * acc);
}

// Per-stage control profile c_i e_i(x) on the mask, weighted by the time factor.
Source stage_source(const ControlFunction& c, const std::vector<char>& mask, std::size_t n, int stage) {
  const control::StagePlan& p = c.schedule.stages[stage];
  const HighVector& coef = c.coefficients[stage];
  const std::size_t m = static_cast<std::size_t>(coef.size());
  const double dx = 1.0 / static_cast<double>(n + 1);
  std::vector<double> profile(m * n, 0.0);
  std::vector<double> w2(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double ci = to_double(coef(static_cast<Eigen::Index>(i)));
    const double w = c.basis->omega(i);
    w2[i] = w * w;
    for (std::size_t g = 0; g < n; ++g) {
      if (mask[g]) profile[i * n + g] = ci * (*c.basis)(i, (g + 1) * dx);
    }
  }
  return [profile = std::move(profile), w2 = std::move(w2), a = p.active_end, n, m](double t, std::vector<double>& f) {
    std::fill(f.begin(), f.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double e = std::exp(-w2[i] * (a - t));
      const double* row = profile.data() + i * n;
      for (std::size_t g = 0; g < n; ++g) f[g] += e * row[g];
    }
  };
}

}  // namespace

HighVector propagate_exact(const spectral::Basis& basis, const HighVector& alpha, const ControlFunction* control,
                           double t0, double t1) {
  const std::size_t J = static_cast<std::size_t>(alpha.size());
  if (J > basis.size()) throw ValidationError("propagate_exact: state has more modes than the basis");
  if (!(t1 >= t0)) throw ValidationError("propagate_exact needs t1 >= t0");
  const int stage = control ? phase_of(*control, t0, t1) : -1;
  const HighReal span = t1 - t0;
  std::vector<HighReal> w2(J), decay(J);
  for (std::size_t j = 0; j < J; ++j) {
    const HighReal w = basis.omega(j);
    w2[j] = w * w;
    decay[j] = exp(-w2[j] * span);
  }
  HighVector out(J);
  for (std::size_t j = 0; j < J; ++j) out(j) = decay[j] * alpha(j);
  if (stage < 0) return out;

  const control::StagePlan& p = control->schedule.stages[stage];
  const HighVector& c = control->coefficients.at(stage);
  const std::size_t n = static_cast<std::size_t>(c.size());
  if (control->gram.rows() < static_cast<Eigen::Index>(J) || n > J) {
    throw ValidationError("propagate_exact: control does not match the state");
  }
  std::vector<HighReal> lag(n);
  for (std::size_t i = 0; i < n; ++i) lag[i] = c(i) * exp(-w2[i] * HighReal(p.active_end - t1));
  for (std::size_t j = 0; j < J; ++j) {
    HighReal acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (control->gram(j, i) == 0) continue;
      acc += control->gram(j, i) * lag[i] * (1 - decay[i] * decay[j]) / (w2[i] + w2[j]);
    }
    out(j) += acc;
  }
  return out;
}

HeatState propagate_exact(const spectral::Basis& basis, const HeatState& state, const ControlFunction* control,
                          double t0, double t1) {
  if (!control) {
    if (state.alpha.size() > basis.size()) {
      throw ValidationError("propagate_exact: state has more modes than the basis");
    }
    if (!(t1 >= t0)) throw ValidationError("propagate_exact needs t1 >= t0");
    HeatState out;
    out.time = t1;
    out.alpha.resize(state.alpha.size());
    for (std::size_t j = 0; j < state.alpha.size(); ++j) {
      const double w = basis.omega(j);
      out.alpha[j] = std::exp(-w * w * (t1 - t0)) * state.alpha[j];
    }
    return out;
  }
  return control::to_state(propagate_exact(basis, control::to_high(state), control, t0, t1), t1);
}

GridState GridState::zeros(std::size_t n_points, double time) {
  if (n_points < 2) throw ValidationError("grid needs at least two interior points");
  GridState g;
  g.n_points = n_points;
  g.values.assign(n_points, 0.0);
  g.dx = 1.0 / static_cast<double>(n_points + 1);
  g.time = time;
  return g;
}

double GridState::l2_norm() const {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(dx * acc);
}

GridState sample(const spectral::Basis& basis, const HeatState& state, std::size_t n_points) {
  GridState g = GridState::zeros(n_points, state.time);
  for (std::size_t i = 0; i < n_points; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < state.alpha.size(); ++j) {
      if (state.alpha[j] != 0.0) acc += state.alpha[j] * basis(j, g.x(i));
    }
    g.values[i] = acc;
  }
  return g;
}

GridState crank_nicolson(const GridState& grid, const spectral::DensitySpec& rho, const std::vector<char>& mask,
                         const Source& source, double dt, std::size_t steps) {
  const std::size_t n = grid.n_points;
  if (!(dt > 0.0)) throw ValidationError("crank_nicolson needs dt > 0");
  if (grid.values.size() != n || mask.size() != n) throw ValidationError("crank_nicolson: size mismatch");
  const double r = 1.0 / (grid.dx * grid.dx);
  std::vector<double> density(n);
  for (std::size_t i = 0; i < n; ++i) density[i] = rho(grid.x(i));

  // (rho/dt + A/2) u+ = (rho/dt - A/2) u + (s + s+)/2, A = -second difference
  Tridiagonal lhs;
  lhs.diag.resize(n);
  for (std::size_t i = 0; i < n; ++i) lhs.diag[i] = density[i] / dt + r;
  lhs.off = -0.5 * r;
  lhs.factor();

  GridState out = grid;
  std::vector<double> u = grid.values;
  std::vector<double> rhs(n);
  std::vector<double> f0(n, 0.0), f1(n, 0.0);
  if (source) source(out.time, f0);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t1 = grid.time + static_cast<double>(s + 1) * dt;
    if (source) source(t1, f1);
    for (std::size_t i = 0; i < n; ++i) {
      const double left = i > 0 ? u[i - 1] : 0.0;
      const double right = i + 1 < n ? u[i + 1] : 0.0;
      rhs[i] = (density[i] / dt - r) * u[i] + 0.5 * r * (left + right);
      if (mask[i]) rhs[i] += 0.5 * (f0[i] + f1[i]);
    }
    lhs.solve(rhs);
    u.swap(rhs);
    f0.swap(f1);
  }
  out.values = std::move(u);
  out.time = grid.time + static_cast<double>(steps) * dt;
  return out;
}

Raster rasterize(const sets::MeasurableSet1D& omega_set, std::size_t n_points) {
  Raster r;
  r.mask.assign(n_points, 0);
  const double dx = 1.0 / static_cast<double>(n_points + 1);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_points; ++i) {
    if (omega_set.contains((i + 1) * dx)) {
      r.mask[i] = 1;
      ++count;
    }
  }
  r.measure = static_cast<double>(count) * dx;
  return r;
}

GridState run_scheme(const control::SynthesisResult& run, const HeatState& u0, std::size_t n_points, double dt) {
  if (!(dt > 0.0)) throw ValidationError("run_scheme needs dt > 0");
  const ControlFunction& c = run.control;
  const spectral::Basis& basis = *c.basis;
  const Raster raster = rasterize(c.omega_set, n_points);
  GridState g = sample(basis, u0, n_points);
  g.time = 0.0;
  auto advance = [&](double t0, double t1, const Source& src) {
    const double len = t1 - t0;
    if (len <= 0.0) return;
    const auto steps = static_cast<std::size_t>(std::ceil(len / dt - 1e-9));
    g.time = t0;
    g = crank_nicolson(g, basis.density, raster.mask, src, len / static_cast<double>(steps), steps);
    g.time = t1;
  };
  for (std::size_t k = 0; k < c.schedule.stages.size(); ++k) {
    const control::StagePlan& p = c.schedule.stages[k];
    advance(p.t_start, p.active_end, stage_source(c, raster.mask, n_points, static_cast<int>(k)));
    advance(p.active_end, p.t_end, Source{});
  }
  advance(c.schedule.tail.lo, c.schedule.tail.hi, Source{});
  return g;
}

CrossValidation cross_validate(const control::SynthesisResult& run, const HeatState& u0, std::size_t n_points,
                               double dt) {
  const std::size_t coarse_n = (n_points + 1) / 2 - 1;
  if (coarse_n < 2) throw ValidationError("cross_validate needs a finer grid");
  const spectral::Basis& basis = *run.control.basis;
  CrossValidation cv;
  cv.n_points = n_points;
  cv.dt = dt;
  cv.set_measure = measure(run.control.omega_set);
  cv.mask_measure = rasterize(run.control.omega_set, n_points).measure;

  const GridState fine = run_scheme(run, u0, n_points, dt);
  const GridState coarse = run_scheme(run, u0, coarse_n, 2.0 * dt);
  cv.distance = l2_distance(fine, sample(basis, run.final_state, n_points));
  cv.coarse_distance = l2_distance(coarse, sample(basis, run.final_state, coarse_n));
  const double h = fine.dx;
  const double hc = coarse.dx;
  cv.model_error = cv.coarse_distance * (h * h + dt * dt) / (hc * hc + 4.0 * dt * dt);
  return cv;
}

DecayBenchmark decay_benchmark(std::size_t n_points, double dt, double t_final) {
  auto error_at = [&](std::size_t n, double step) {
    GridState g = GridState::zeros(n);
    for (std::size_t i = 0; i < n; ++i) g.values[i] = std::numbers::sqrt2 * std::sin(std::numbers::pi * g.x(i));
    const auto steps = static_cast<std::size_t>(std::llround(t_final / step));
    const std::vector<char> mask(n, 0);
    const GridState end = crank_nicolson(g, spectral::DensitySpec::constant(1.0), mask, Source{}, step, steps);
    const double decay = std::exp(-std::numbers::pi * std::numbers::pi * end.time);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double exact = decay * std::numbers::sqrt2 * std::sin(std::numbers::pi * end.x(i));
      err = std::max(err, std::abs(end.values[i] - exact));
    }
    return err;
  };
  DecayBenchmark b;
  b.error = error_at(n_points, dt);
  b.fine_error = error_at(2 * (n_points + 1) - 1, 0.5 * dt);
  b.ratio = b.error / b.fine_error;
  return b;
}

void write_snapshot_csv(std::ostream& out, const GridState& grid) {
  out << "x,u\n";
  csv::write_row(out, {0.0, 0.0});
  for (std::size_t i = 0; i < grid.n_points; ++i) csv::write_row(out, {grid.x(i), grid.values[i]});
  csv::write_row(out, {1.0, 0.0});
}

}  // namespace nullctl::simulate
