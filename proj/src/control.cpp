#include "nullctl/control.hpp"

#include "nullctl/csv.hpp"
#include "nullctl/error.hpp"
#include "nullctl/observability.hpp"
#include "nullctl/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace nullctl::control {

namespace {

constexpr double kMinActiveFraction = 1e-12;
constexpr double kTikhonov = 1e-12;
constexpr double kRegularizedResidual = 1e-8;
constexpr double kAnnihilation = 1e-10;

HighVector solve_spd(const HighMatrix& lambda, const HighVector& rhs, bool& regularized) {
  Eigen::LLT<HighMatrix> llt(lambda);
  regularized = llt.info() != Eigen::Success;
  if (!regularized) return llt.solve(rhs);
  Eigen::SelfAdjointEigenSolver<HighMatrix> eig(lambda, Eigen::EigenvaluesOnly);
  const HighReal shift = HighReal(kTikhonov) * eig.eigenvalues()(lambda.rows() - 1);
  HighMatrix reg = lambda;
  reg.diagonal().array() += shift;
  Eigen::LLT<HighMatrix> llt2(reg);
  if (llt2.info() != Eigen::Success) throw NumericalError("stage_control: solve failed after regularization");
  return llt2.solve(rhs);
}

}  // namespace

Schedule make_schedule(double T, double mu0, int K) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("schedule needs T > 0");
  if (!(mu0 > 0.0)) throw ValidationError("schedule needs mu0 > 0");
  if (K < 1) throw ValidationError("schedule needs K >= 1");
  if (std::ldexp(T, -(K + 1)) < kMinActiveFraction * T) {
    throw ValidationError("schedule: stage length underflows the time resolution");
  }
  Schedule s;
  s.T = T;
  double t = 0.0;
  for (int k = 0; k < K; ++k) {
    const double len = std::ldexp(T, -(k + 1));
    StagePlan p;
    p.t_start = t;
    p.t_end = k + 1 == K ? T - std::ldexp(T, -K) : t + len;
    p.active_end = t + 0.5 * len;
    p.mu_k = std::ldexp(mu0, k);
    s.stages.push_back(p);
    t = p.t_end;
  }
  s.tail = {t, T};
  return s;
}

double HeatState::norm() const {
  double acc = 0.0;
  for (double a : alpha) acc += a * a;
  return std::sqrt(acc);
}

int ControlFunction::stage_at(double t) const {
  for (std::size_t k = 0; k < schedule.stages.size(); ++k) {
    const StagePlan& p = schedule.stages[k];
    if (t >= p.t_start && t <= p.active_end) return static_cast<int>(k);
  }
  return -1;
}

double ControlFunction::operator()(double x, double t) const {
  const int k = stage_at(t);
  if (k < 0 || !omega_set.contains(x)) return 0.0;
  const StagePlan& p = schedule.stages[k];
  const HighVector& c = coefficients[k];
  double acc = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double w = basis->omega(i);
    acc += nullctl::to_double(c(i)) * std::exp(-w * w * (p.active_end - t)) * (*basis)(i, x);
  }
  return acc;
}

std::size_t controlled_modes(const spectral::Basis& basis, double mu) {
  std::size_t n = 0;
  while (n < basis.size() && basis.omega(n) <= mu * (1.0 + 1e-12)) ++n;
  return n;
}

double truncation_factor(const spectral::Basis& basis, const Schedule& schedule) {
  if (basis.size() == 0 || schedule.stages.empty()) throw ValidationError("truncation_factor: empty input");
  double tau = schedule.T;
  for (const StagePlan& p : schedule.stages) tau = std::min(tau, schedule.T - p.active_end);
  const double w = basis.omega(basis.size() - 1);
  return std::exp(-w * w * tau);
}

HighMatrix stage_gramian(const spectral::Basis& basis, const HighMatrix& gram, std::size_t n, double active_length) {
  if (n == 0 || n > basis.size() || static_cast<Eigen::Index>(n) > gram.rows()) {
    throw ValidationError("stage_gramian: mode count out of range");
  }
  if (!(active_length > 0.0)) throw ValidationError("stage_gramian needs a positive active length");
  const HighReal L = active_length;
  HighMatrix lambda(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const HighReal wi = basis.omega(i);
      const HighReal wj = basis.omega(j);
      const HighReal s = wi * wi + wj * wj;
      const HighReal v = gram(i, j) * -expm1(-s * L) / s;
      lambda(i, j) = v;
      lambda(j, i) = v;
    }
  }
  return lambda;
}

HighVector to_high(const HeatState& state) {
  HighVector v(state.alpha.size());
  for (std::size_t j = 0; j < state.alpha.size(); ++j) v(j) = state.alpha[j];
  return v;
}

HeatState to_state(const HighVector& alpha, double time) {
  HeatState s;
  s.time = time;
  s.alpha.resize(alpha.size());
  for (Eigen::Index j = 0; j < alpha.size(); ++j) s.alpha[j] = nullctl::to_double(alpha(j));
  return s;
}

StageSolution stage_control(const spectral::Basis& basis, const HighMatrix& gram, const HighVector& alpha,
                            const StagePlan& stage) {
  const std::size_t J = static_cast<std::size_t>(alpha.size());
  if (J != basis.size() || gram.rows() != static_cast<Eigen::Index>(J)) {
    throw ValidationError("stage_control: state, basis and Gram sizes differ");
  }
  const std::size_t n = stage.mode_count;
  if (n == 0 || n > J) throw ValidationError("stage_control: mode_count out of range");
  const double L = stage.active_length();
  const HighMatrix lambda = stage_gramian(basis, gram, n, L);

  HighVector d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const HighReal w = basis.omega(i);
    d(i) = exp(-w * w * HighReal(L)) * alpha(i);
  }
  StageSolution out;
  const HighReal dn = d.norm();
  out.d_norm = nullctl::to_double(dn);
  out.c = HighVector::Zero(n);
  if (dn > 0) out.c = solve_spd(lambda, HighVector(-d), out.regularized);
  HighReal cost2 = out.c.dot(lambda * out.c);
  if (cost2 < 0) cost2 = 0;
  out.cost = nullctl::to_double(sqrt(cost2));
  out.log_cost = cost2 > 0 ? nullctl::to_double(log(cost2)) / 2.0 : -std::numeric_limits<double>::infinity();

  ControlFunction single;
  single.schedule.T = stage.t_end;
  single.schedule.stages = {stage};
  single.schedule.tail = {stage.t_end, stage.t_end};
  single.basis = &basis;
  single.gram = gram;
  single.coefficients = {out.c};
  out.after_active = simulate::propagate_exact(basis, alpha, &single, stage.t_start, stage.active_end);
  HighReal worst = 0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, HighReal(abs(out.after_active(i))));
  out.residual = nullctl::to_double(worst);
  const HighReal allowed = HighReal(out.regularized ? kRegularizedResidual : kAnnihilation) * dn;
  if (worst > allowed) {
    std::ostringstream os;
    os << "stage_control: annihilation residual " << out.residual << " exceeds " << nullctl::to_double(allowed);
    throw NumericalError(os.str());
  }
  return out;
}

StageSolution stage_control(const spectral::Basis& basis, const HighMatrix& gram, const HeatState& state,
                            const StagePlan& stage) {
  return stage_control(basis, gram, to_high(state), stage);
}

SynthesisResult synthesize(const HeatState& u0, const spectral::Basis& basis, const sets::MeasurableSet1D& omega_set,
                           double T, double mu0, int K, int samples_per_phase) {
  const std::size_t J = basis.size();
  if (J == 0) throw ValidationError("synthesize needs at least one mode");
  if (u0.alpha.size() != J) throw ValidationError("synthesize: u0 must have one coefficient per mode");
  if (mu0 < basis.omega(0) * (1.0 - 1e-12)) throw ValidationError("synthesize needs mu0 >= w_1");
  if (samples_per_phase < 0) throw ValidationError("samples_per_phase must be >= 0");

  SynthesisResult r;
  r.control.schedule = make_schedule(T, mu0, K);
  r.control.omega_set = omega_set;
  r.control.basis = &basis;
  std::vector<std::size_t> all(J);
  for (std::size_t j = 0; j < J; ++j) all[j] = j;
  r.control.gram = observability::spatial_gram(basis, omega_set, all).matrix;

  r.initial_norm = u0.norm();
  HighVector state = to_high(u0);
  HighReal cost2 = 0;
  auto record = [&](const HighVector& s, double t, int stage) {
    r.trace.push_back({t, nullctl::to_double(s.norm()), stage, nullctl::to_double(sqrt(cost2))});
  };
  record(state, 0.0, 0);

  for (std::size_t k = 0; k < r.control.schedule.stages.size(); ++k) {
    StagePlan& p = r.control.schedule.stages[k];
    p.mode_count = controlled_modes(basis, p.mu_k);
    const int stage = static_cast<int>(k);
    StageSolution sol = stage_control(basis, r.control.gram, state, p);
    r.control.coefficients.push_back(sol.c);
    for (int s = 1; s <= samples_per_phase; ++s) {
      const double t = p.t_start + p.active_length() * s / (samples_per_phase + 1);
      record(simulate::propagate_exact(basis, state, &r.control, p.t_start, t), t, stage);
    }
    cost2 += sol.cost > 0.0 || sol.log_cost > -std::numeric_limits<double>::infinity()
                 ? exp(HighReal(2.0 * sol.log_cost))
                 : HighReal(0);
    r.stage_costs.push_back(sol.cost);
    r.stage_log_costs.push_back(sol.log_cost);
    r.stage_residuals.push_back(sol.residual);
    r.stage_regularized.push_back(sol.regularized);
    state = sol.after_active;
    record(state, p.active_end, stage);
    for (int s = 1; s <= samples_per_phase; ++s) {
      const double t = p.active_end + (p.t_end - p.active_end) * s / (samples_per_phase + 1);
      record(simulate::propagate_exact(basis, sol.after_active, nullptr, p.active_end, t), t, stage);
    }
    state = simulate::propagate_exact(basis, sol.after_active, nullptr, p.active_end, p.t_end);
    record(state, p.t_end, stage);
  }
  const int tail_stage = static_cast<int>(r.control.schedule.stages.size());
  const sets::Interval tail = r.control.schedule.tail;
  for (int s = 1; s <= samples_per_phase; ++s) {
    const double t = tail.lo + tail.length() * s / (samples_per_phase + 1);
    record(simulate::propagate_exact(basis, state, nullptr, tail.lo, t), t, tail_stage);
  }
  state = simulate::propagate_exact(basis, state, nullptr, tail.lo, tail.hi);
  record(state, tail.hi, tail_stage);

  r.final_high = state;
  r.final_state = to_state(state, T);
  r.cost_total = nullctl::to_double(sqrt(cost2));
  r.ratio = r.initial_norm > 0.0 ? r.cost_total / r.initial_norm : 0.0;
  return r;
}

CostReport cost_audit(const SynthesisResult& run) {
  CostReport rep;
  rep.stage_costs = run.stage_costs;
  rep.stage_log_costs = run.stage_log_costs;
  rep.N_eff = run.ratio;
  const auto& lc = rep.stage_log_costs;
  if (lc.empty()) return rep;
  rep.peak_stage = static_cast<std::size_t>(std::max_element(lc.begin(), lc.end()) - lc.begin());
  for (std::size_t k = 1; k < lc.size(); ++k) rep.log_ratios.push_back(lc[k] - lc[k - 1]);
  rep.geometric_after_peak = std::isfinite(lc[rep.peak_stage]);
  for (std::size_t k = rep.peak_stage + 1; k < lc.size(); ++k) {
    if (!(lc[k] < lc[k - 1])) rep.geometric_after_peak = false;
  }
  return rep;
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "t,norm,stage,cumulative_cost\n";
  for (const TracePoint& p : trace) {
    csv::write_row(out, {p.t, p.norm, static_cast<long long>(p.stage), p.cumulative_cost});
  }
}

HeatState random_state(std::size_t J, std::uint64_t seed) {
  if (J == 0) throw ValidationError("random_state needs J >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  HeatState s;
  s.alpha.resize(J);
  for (double& a : s.alpha) a = nd(rng);
  const double n = s.norm();
  for (double& a : s.alpha) a /= n;
  return s;
}

}  // namespace nullctl::control
