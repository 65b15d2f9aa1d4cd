#pragma once

// Stagewise null controls for u_t = (1/rho) u_xx + (1/rho) chi_omega f on (0,1)
// with Dirichlet ends. Each stage kills the modes below mu_k with the
// minimal-norm control in the span of decaying adjoint modes, then lets the
// state decay freely.

#include "nullctl/high_precision.hpp"
#include "nullctl/sets.hpp"
#include "nullctl/spectral_basis.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace nullctl::control {

struct StagePlan {
  double t_start = 0.0;
  double t_end = 0.0;
  double active_end = 0.0;
  double mu_k = 0.0;
  std::size_t mode_count = 0;  // filled in once a basis is known

  double active_length() const { return active_end - t_start; }
};

struct Schedule {
  std::vector<StagePlan> stages;
  double T = 0.0;
  sets::Interval tail;
};

/// Stage k covers [T(1 - 2^-k), T(1 - 2^-(k+1))], first half active;
/// mu_k = mu0 2^k. Throws ValidationError for bad arguments or when an
/// active phase is shorter than 1e-12 T.
Schedule make_schedule(double T, double mu0, int K);

struct HeatState {
  double time = 0.0;
  std::vector<double> alpha;

  double norm() const;
};

/// f(x,t) = chi_omega(x) sum_i c_i e^{-w_i^2 (active_end - t)} e_i(x) on each
/// active interval, zero elsewhere.
struct ControlFunction {
  Schedule schedule;
  sets::MeasurableSet1D omega_set;
  const spectral::Basis* basis = nullptr;
  HighMatrix gram;                         // int_omega e_i e_j over all J modes
  std::vector<HighVector> coefficients;    // per stage, length mode_count

  int stage_at(double t) const;  // active stage index containing t, or -1
  double operator()(double x, double t) const;
};

/// Lambda_ij = G_ij (1 - e^{-(w_i^2 + w_j^2) L}) / (w_i^2 + w_j^2) over the
/// first n modes.
HighMatrix stage_gramian(const spectral::Basis& basis, const HighMatrix& gram, std::size_t n, double active_length);

struct StageSolution {
  HighVector c;
  double cost = 0.0;
  double log_cost = 0.0;  // -inf for a zero control
  double residual = 0.0;  // max over controlled modes of |alpha_i(active_end)|
  double d_norm = 0.0;
  bool regularized = false;
  HighVector after_active;  // all modes at active_end
};

/// Solves Lambda c = -d with d_i = e^{-w_i^2 L} alpha_i(t_start) and carries
/// every mode to active_end in closed form. Tikhonov fallback (1e-12 lambda_max)
/// when the Cholesky factorization fails; NumericalError if the annihilation
/// residual then exceeds 1e-8 |d|.
StageSolution stage_control(const spectral::Basis& basis, const HighMatrix& gram, const HighVector& alpha,
                            const StagePlan& stage);
StageSolution stage_control(const spectral::Basis& basis, const HighMatrix& gram, const HeatState& state,
                            const StagePlan& stage);

HighVector to_high(const HeatState& state);
HeatState to_state(const HighVector& alpha, double time);

/// Number of modes with w_j <= mu, capped at the basis size.
std::size_t controlled_modes(const spectral::Basis& basis, double mu);

/// e^{-w_J^2 tau} with tau the shortest passive time after any active phase:
/// an upper bound on the decay of modes above the truncation.
double truncation_factor(const spectral::Basis& basis, const Schedule& schedule);

struct TracePoint {
  double t = 0.0;
  double norm = 0.0;
  int stage = 0;
  double cumulative_cost = 0.0;
};

struct SynthesisResult {
  ControlFunction control;
  std::vector<TracePoint> trace;
  std::vector<double> stage_costs;
  std::vector<double> stage_log_costs;
  std::vector<double> stage_residuals;
  std::vector<bool> stage_regularized;
  HeatState final_state;
  HighVector final_high;
  double cost_total = 0.0;
  double initial_norm = 0.0;
  double ratio = 0.0;
};

/// Runs all stages, sampling the trace at `samples_per_phase` points in each
/// active and passive phase (and once at every phase boundary).
SynthesisResult synthesize(const HeatState& u0, const spectral::Basis& basis, const sets::MeasurableSet1D& omega_set,
                           double T, double mu0, int K, int samples_per_phase = 4);

struct CostReport {
  std::vector<double> stage_costs;
  std::vector<double> stage_log_costs;
  std::vector<double> log_ratios;  // log(cost_k / cost_{k-1}), k >= 1
  std::size_t peak_stage = 0;
  bool geometric_after_peak = false;
  double N_eff = 0.0;
};

CostReport cost_audit(const SynthesisResult& run);

/// Header t,norm,stage,cumulative_cost then one row per trace point.
void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);

/// Unit-norm random initial data over J modes.
HeatState random_state(std::size_t J, std::uint64_t seed);

}  // namespace nullctl::control
