#pragma once

// Forward solvers for the controlled heat equation: the per-mode closed form
// and a Crank-Nicolson finite-difference scheme used to cross-check it.

#include "nullctl/control.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace nullctl::simulate {

/// alpha_j(t1) = e^{-w_j^2 (t1-t0)} alpha_j(t0) plus the closed-form source
/// integral of the control over [t0, t1]. The span must lie inside one active
/// or one passive phase (or anywhere when control is null).
control::HeatState propagate_exact(const spectral::Basis& basis, const control::HeatState& state,
                                   const control::ControlFunction* control, double t0, double t1);

/// Same in extended precision; coefficients far below the double range stay
/// representable.
HighVector propagate_exact(const spectral::Basis& basis, const HighVector& alpha,
                           const control::ControlFunction* control, double t0, double t1);

/// Interior nodes x_i = i dx, i = 1..n, dx = 1/(n+1); zero at both ends.
struct GridState {
  std::size_t n_points = 0;
  std::vector<double> values;
  double dx = 0.0;
  double time = 0.0;

  static GridState zeros(std::size_t n_points, double time = 0.0);
  double x(std::size_t i) const { return (i + 1) * dx; }
  double l2_norm() const;  // sqrt(dx sum u_i^2)
};

/// Samples sum_j alpha_j e_j at the grid nodes.
GridState sample(const spectral::Basis& basis, const control::HeatState& state, std::size_t n_points);

/// Fills f(x_i, t) for every interior node.
using Source = std::function<void(double t, std::vector<double>& values)>;

/// `steps` trapezoidal steps of rho u_t = u_xx + mask(x) f(x,t) from
/// grid.time, tridiagonal solves; mask is 1 where the node lies in omega.
/// rho is sampled at the nodes. An empty source means f = 0.
GridState crank_nicolson(const GridState& grid, const spectral::DensitySpec& rho, const std::vector<char>& mask,
                         const Source& source, double dt, std::size_t steps);

/// Node mask for omega and the measure it represents (count * dx).
struct Raster {
  std::vector<char> mask;
  double measure = 0.0;
};
Raster rasterize(const sets::MeasurableSet1D& omega_set, std::size_t n_points);

/// Runs Crank-Nicolson through every phase of the schedule, splitting each
/// phase into ceil(length/dt) equal steps.
GridState run_scheme(const control::SynthesisResult& run, const control::HeatState& u0, std::size_t n_points,
                     double dt);

struct CrossValidation {
  double distance = 0.0;        // ||exact(T) - scheme_h(T)||
  double coarse_distance = 0.0; // ||exact(T) - scheme_2h(T)||
  double model_error = 0.0;     // coarse_distance scaled by (dx^2 + dt^2) / (dxc^2 + 4 dt^2)
  double mask_measure = 0.0;
  double set_measure = 0.0;
  std::size_t n_points = 0;
  double dt = 0.0;
};

/// L2 distances at t = T between the closed-form final state and the scheme
/// at (dx, dt) and on the coarse grid (n+1)/2 - 1 at 2dt. The coarse
/// distance fixes C in e = C (dx^2 + dt^2), which predicts the fine error.
CrossValidation cross_validate(const control::SynthesisResult& run, const control::HeatState& u0,
                               std::size_t n_points = 512, double dt = 1e-4);

struct DecayBenchmark {
  double error = 0.0;       // max nodal error at (n, dt)
  double fine_error = 0.0;  // at (2(n+1)-1, dt/2)
  double ratio = 0.0;
};

/// u0 = sqrt2 sin(pi x), no source, until t_final; error against
/// e^{-pi^2 t} sqrt2 sin(pi x).
DecayBenchmark decay_benchmark(std::size_t n_points = 512, double dt = 1e-4, double t_final = 0.1);

/// Rows x,u for one snapshot.
void write_snapshot_csv(std::ostream& out, const GridState& grid);

}  // namespace nullctl::simulate
