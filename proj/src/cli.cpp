#include "nullctl/cli.hpp"

#include "nullctl/control.hpp"
#include "nullctl/csv.hpp"
#include "nullctl/error.hpp"
#include "nullctl/falsification.hpp"
#include "nullctl/observability.hpp"
#include "nullctl/parallel.hpp"
#include "nullctl/simulate.hpp"

#include <CLI11.hpp>
#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace nullctl::cli {

namespace {

namespace fs = std::filesystem;

constexpr double kTruncationLimit = 1e-12;

const char* kHelpFooter =
    "Outputs (17 significant digits):\n"
    "  smallness-verify  smallness.csv  trial,family,measE,epsE,bound,true_sup,margin\n"
    "  spectral-ineq     spectral.csv   mu,n_modes,lambda_min,C,logC\n"
    "  control-run       trace.csv      t,norm,stage,cumulative_cost\n"
    "                    crossval.csv   n_points,dt,distance,coarse_distance,model_error,mask_measure,set_measure\n"
    "                    snapshot_<i>.csv  x,u (one per control.snapshots entry)\n"
    "  sweep             sweep.csv      run,seed,omega_measure,N_eff,cost_total,final_norm,geometric_after_peak\n"
    "                    sweep_run_<i>.csv  t,norm,stage,cumulative_cost\n"
    "Exit codes: 0 success, 1 usage, 2 invalid input, 3 numerical failure.\n";

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

void check_keys(const toml::table& t, const std::string& where, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : t) {
    if (!ok.count(std::string(k.str()))) fail(where, "unknown key '" + std::string(k.str()) + "'");
  }
}

double as_real(const toml::node& n, const std::string& where) {
  if (auto v = n.value<double>()) return *v;
  if (auto s = n.value<std::string>()) return parse_real(*s);
  fail(where, "expected a number");
}

long long as_integer(const toml::node& n, const std::string& where) {
  if (auto v = n.value<long long>()) return *v;
  fail(where, "expected an integer");
}

std::vector<double> real_list(const toml::node& n, const std::string& where) {
  if (auto s = n.value<std::string>()) return parse_real_list(*s);
  const toml::array* arr = n.as_array();
  if (!arr) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (const toml::node& e : *arr) out.push_back(as_real(e, where));
  return out;
}

sets::MeasurableSet1D omega_from(const toml::node& n, const std::string& where) {
  if (auto s = n.value<std::string>()) return parse_omega(*s);
  if (const toml::table* t = n.as_table()) {
    check_keys(*t, where, {"fat_cantor_depth", "fat_cantor_ratio"});
    sets::FatCantorSpec spec;
    if (const toml::node* d = t->get("fat_cantor_depth")) spec.depth = static_cast<int>(as_integer(*d, where));
    if (const toml::node* r = t->get("fat_cantor_ratio")) spec.removal_ratio = as_real(*r, where);
    return sets::fat_cantor(spec);
  }
  const toml::array* arr = n.as_array();
  if (!arr) fail(where, "expected [[lo, hi], ...], a string or a fat Cantor table");
  std::vector<sets::Interval> pieces;
  for (const toml::node& e : *arr) {
    const auto pair = real_list(e, where);
    if (pair.size() != 2) fail(where, "each interval needs [lo, hi]");
    pieces.push_back({pair[0], pair[1]});
  }
  return sets::MeasurableSet1D(std::move(pieces));
}

spectral::DensitySpec density_from(const toml::node& n, const std::string& where) {
  if (auto v = n.value<double>()) return spectral::DensitySpec::constant(*v);
  const toml::array* arr = n.as_array();
  if (!arr) fail(where, "expected a number or [[lo, hi, value], ...]");
  std::vector<spectral::DensityPiece> pieces;
  for (const toml::node& e : *arr) {
    const auto triple = real_list(e, where);
    if (triple.size() != 3) fail(where, "each density piece needs [lo, hi, value]");
    pieces.push_back({{triple[0], triple[1]}, triple[2]});
  }
  return spectral::DensitySpec::piecewise(std::move(pieces));
}

bool is_unit(const spectral::DensitySpec& d) { return d.pieces.size() == 1 && d.pieces[0].value == 1.0; }

spectral::Basis make_basis(const spectral::DensitySpec& d, int J) {
  return is_unit(d) ? spectral::sine_basis(J) : spectral::sturm_liouville_basis(d, J);
}

// smallest J whose top frequency reaches mu
int modes_for(const spectral::DensitySpec& d, double mu) {
  if (is_unit(d)) return std::max(1, static_cast<int>(std::ceil(mu / std::numbers::pi * (1.0 - 1e-12))));
  int J = std::max(1, static_cast<int>(std::ceil(mu * std::sqrt(d.max_value()) / std::numbers::pi)) + 1);
  for (;;) {
    const auto b = spectral::sturm_liouville_basis(d, J);
    if (b.omega(J - 1) >= mu) {
      int n = J;
      while (n > 1 && b.omega(n - 2) >= mu) --n;
      return n;
    }
    J *= 2;
  }
}

observability::GramMethod gram_method(const std::string& s) {
  if (s == "automatic") return observability::GramMethod::automatic;
  if (s == "closed_form") return observability::GramMethod::closed_form;
  if (s == "quadrature") return observability::GramMethod::quadrature;
  throw ValidationError("spectral.method must be automatic, closed_form or quadrature");
}

control::HeatState initial_state(const ControlConfig& c, std::uint64_t seed) {
  const std::size_t J = static_cast<std::size_t>(c.modes);
  if (c.u0 == "random") return control::random_state(J, seed);
  if (c.u0.rfind("mode:", 0) == 0) {
    const long j = std::stol(c.u0.substr(5));
    if (j < 1 || static_cast<std::size_t>(j) > J) throw ValidationError("u0 mode index out of range");
    control::HeatState s{0.0, std::vector<double>(J, 0.0)};
    s.alpha[j - 1] = 1.0;
    return s;
  }
  if (c.u0.rfind("file:", 0) == 0) {
    std::ifstream in(c.u0.substr(5));
    if (!in) throw ValidationError("cannot open u0 file " + c.u0.substr(5));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream is(text);
    control::HeatState s{0.0, {}};
    double v;
    while (is >> v) s.alpha.push_back(v);
    if (!is.eof()) throw ValidationError("u0 file must hold numbers only");
    if (s.alpha.empty() || s.alpha.size() > J) throw ValidationError("u0 file needs 1..J coefficients");
    s.alpha.resize(J, 0.0);
    return s;
  }
  throw ValidationError("u0 must be random, mode:j or file:PATH");
}

void validate_control(const ControlConfig& c) {
  if (c.omega.empty() || !(measure(c.omega) > 0.0)) throw ValidationError("control.omega needs positive measure");
  if (c.modes < 1) throw ValidationError("control.modes must be >= 1");
  if (c.samples_per_phase < 0) throw ValidationError("control.samples_per_phase must be >= 0");
  if (c.grid < 3) throw ValidationError("control.grid must be >= 3");
  if (!(c.dt > 0.0)) throw ValidationError("control.dt must be > 0");
  const control::Schedule s = control::make_schedule(c.T, c.mu0 > 0.0 ? c.mu0 : 1.0, c.stages);
  for (double t : c.snapshots) {
    if (!(t >= 0.0 && t <= c.T)) throw ValidationError("control.snapshots must lie in [0, T]");
  }
  const spectral::Basis b = make_basis(c.density, c.modes);
  if (c.mu0 > 0.0 && c.mu0 < b.omega(0) * (1.0 - 1e-12)) throw ValidationError("control.mu0 must be >= w_1");
  const double tf = control::truncation_factor(b, s);
  if (tf > kTruncationLimit) {
    std::ostringstream os;
    os << "control.modes too small: modes above w_J decay only by " << tf << " after the last active phase";
    throw ValidationError(os.str());
  }
  if (c.u0 != "random" && c.u0.rfind("mode:", 0) != 0 && c.u0.rfind("file:", 0) != 0) {
    throw ValidationError("control.u0 must be random, mode:j or file:PATH");
  }
}

void validate_spectral(const SpectralConfig& c) {
  if (c.omega.empty() || !(measure(c.omega) > 0.0)) throw ValidationError("spectral.omega needs positive measure");
  if (c.mu.empty()) throw ValidationError("spectral.mu needs at least one value");
  for (double m : c.mu) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ValidationError("spectral.mu values must be positive");
  }
  gram_method(c.method);
  if (c.method == "closed_form" && !is_unit(c.density)) {
    throw ValidationError("spectral.method closed_form needs the unit density");
  }
  if (c.modes < 0) throw ValidationError("spectral.modes must be >= 0");
  if (c.modes > 0) {
    const spectral::Basis b = make_basis(c.density, c.modes);
    const double top = *std::max_element(c.mu.begin(), c.mu.end());
    if (top * (1.0 - 1e-12) > b.omega(b.size() - 1)) {
      throw SpectrumRangeError("spectral.mu exceeds w_J; raise spectral.modes");
    }
    if (c.mu.size() && *std::min_element(c.mu.begin(), c.mu.end()) < b.omega(0) * (1.0 - 1e-12)) {
      throw ValidationError("spectral.mu values must be >= w_1");
    }
  }
}

void validate_smallness(const SmallnessConfig& c) {
  if (c.trials < 1) throw ValidationError("smallness.trials must be >= 1");
  if (!(c.trig_fraction >= 0.0 && c.trig_fraction <= 1.0)) throw ValidationError("smallness.trig_fraction in [0,1]");
  if (c.max_degree < 0 || c.max_degree > 40) throw ValidationError("smallness.max_degree in [0,40]");
  if (c.max_modes < 1 || c.max_modes > 8) throw ValidationError("smallness.max_modes in [1,8]");
  if (!(c.points_per_unit_1d >= 16) || !(c.points_per_unit_2d >= 16)) {
    throw ValidationError("smallness grid resolution must be >= 16 points per unit");
  }
  if (c.directions < 1) throw ValidationError("smallness.directions must be >= 1");
}

// ---------------------------------------------------------------------------
// output

class Sink {
 public:
  Sink(std::optional<std::string> dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {
    if (dir_) fs::create_directories(*dir_);
  }

  bool to_files() const { return dir_.has_value(); }

  // files are written to a temporary name and renamed into place
  void emit(const std::string& name, const std::string& content, bool primary) {
    if (!dir_) {
      if (primary) out_ << content;
      return;
    }
    const fs::path target = fs::path(*dir_) / name;
    const fs::path tmp = fs::path(*dir_) / (name + ".tmp");
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw ValidationError("cannot write " + tmp.string());
      f << content;
      if (!f) throw ValidationError("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
  }

  std::ostream& summary(std::ostream& err) { return dir_ ? out_ : err; }

 private:
  std::optional<std::string> dir_;
  std::ostream& out_;
};

int run_smallness(const ExperimentConfig& cfg, Sink& sink, std::ostream& err) {
  const SmallnessConfig& c = *cfg.smallness;
  smallness::HarnessOptions o;
  o.trials = c.trials;
  o.trig_fraction = c.trig_fraction;
  o.max_degree = c.max_degree;
  o.max_modes = c.max_modes;
  o.seed = cfg.seed;
  o.theorem3.points_per_unit_1d = c.points_per_unit_1d;
  o.theorem3.points_per_unit_2d = c.points_per_unit_2d;
  o.theorem3.directions = c.directions;
  const auto records = smallness::falsification_harness(o);
  std::ostringstream os;
  smallness::write_harness_csv(os, records);
  sink.emit("smallness.csv", os.str(), true);
  int violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    violations += r.margin < 0.0;
    min_margin = std::min(min_margin, r.margin);
  }
  sink.summary(err) << "trials=" << records.size() << " violations=" << violations
                    << " min_margin=" << csv::format(min_margin) << '\n';
  return violations == 0 ? kSuccess : kNumerical;
}

int run_spectral(const ExperimentConfig& cfg, Sink& sink, std::ostream& err) {
  const SpectralConfig& c = *cfg.spectral;
  const double top = *std::max_element(c.mu.begin(), c.mu.end());
  const int J = c.modes > 0 ? c.modes : modes_for(c.density, top);
  const spectral::Basis basis = make_basis(c.density, J);
  const auto method = gram_method(c.method);
  std::vector<observability::SpectralRow> rows(c.mu.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    const auto form = observability::spatial_gram(basis, c.omega, c.mu[i], method);
    const auto k = observability::spectral_constant(form);
    rows[i] = {c.mu[i], form.n_modes(), k.lambda_min, k.C, k.logC};
  });
  std::ostringstream os;
  observability::write_spectral_csv(os, rows);
  sink.emit("spectral.csv", os.str(), true);
  std::ostream& s = sink.summary(err);
  s << "modes=" << J << " omega_measure=" << csv::format(measure(c.omega));
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(r.mu, r.logC);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first == b.first; }), pts.end());
  if (pts.size() >= 3) {
    const auto fit = observability::fit_log_rate(pts);
    s << " fit_N=" << csv::format(fit.N) << " fit_intercept=" << csv::format(fit.intercept)
      << " r_squared=" << csv::format(fit.r_squared);
  }
  s << '\n';
  return kSuccess;
}

std::string trace_text(const control::SynthesisResult& r) {
  std::ostringstream os;
  control::write_trace_csv(os, r.trace);
  return os.str();
}

int run_control(const ExperimentConfig& cfg, Sink& sink, std::ostream& err) {
  const ControlConfig& c = *cfg.control;
  const spectral::Basis basis = make_basis(c.density, c.modes);
  const double mu0 = c.mu0 > 0.0 ? c.mu0 : basis.omega(0);
  const control::HeatState u0 = initial_state(c, cfg.seed);
  const auto run = control::synthesize(u0, basis, c.omega, c.T, mu0, c.stages, c.samples_per_phase);
  const auto audit = control::cost_audit(run);
  sink.emit("trace.csv", trace_text(run), true);

  std::ostream& s = sink.summary(err);
  s << "N_eff=" << csv::format(audit.N_eff) << " cost_total=" << csv::format(run.cost_total)
    << " final_norm=" << csv::format(run.final_state.norm()) << " stages=" << run.stage_costs.size()
    << " geometric_after_peak=" << (audit.geometric_after_peak ? 1 : 0) << '\n';

  if (c.cross_validate) {
    const auto cv = simulate::cross_validate(run, u0, static_cast<std::size_t>(c.grid), c.dt);
    std::ostringstream os;
    os << "n_points,dt,distance,coarse_distance,model_error,mask_measure,set_measure\n";
    csv::write_row(os, {static_cast<long long>(cv.n_points), cv.dt, cv.distance, cv.coarse_distance, cv.model_error,
                        cv.mask_measure, cv.set_measure});
    sink.emit("crossval.csv", os.str(), false);
    s << "crossval_distance=" << csv::format(cv.distance) << " model_error=" << csv::format(cv.model_error)
      << " mask_measure=" << csv::format(cv.mask_measure) << '\n';
  }
  if (!c.snapshots.empty() && sink.to_files()) {
    for (std::size_t i = 0; i < c.snapshots.size(); ++i) {
      // closed-form state at the snapshot time, phase by phase
      const double t = c.snapshots[i];
      HighVector a = control::to_high(u0);
      double now = 0.0;
      std::vector<double> marks;
      for (const auto& p : run.control.schedule.stages) {
        marks.push_back(p.active_end);
        marks.push_back(p.t_end);
      }
      marks.push_back(c.T);
      for (double m : marks) {
        const double next = std::min(m, t);
        if (next > now) {
          a = simulate::propagate_exact(basis, a, &run.control, now, next);
          now = next;
        }
      }
      const auto grid = simulate::sample(basis, control::to_state(a, t), static_cast<std::size_t>(c.grid));
      std::ostringstream os;
      simulate::write_snapshot_csv(os, grid);
      std::ostringstream name;
      name << "snapshot_" << i << ".csv";
      sink.emit(name.str(), os.str(), false);
    }
  }
  return kSuccess;
}

int run_sweep(const ExperimentConfig& cfg, Sink& sink, std::ostream& err) {
  const ControlConfig& c = *cfg.control;
  const SweepConfig& sw = *cfg.sweep;
  const spectral::Basis basis = make_basis(c.density, c.modes);
  const double mu0 = c.mu0 > 0.0 ? c.mu0 : basis.omega(0);
  struct Job {
    std::size_t omega;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t o = 0; o < sw.omegas.size(); ++o) {
    for (std::uint64_t seed : sw.seeds) jobs.push_back({o, seed});
  }
  struct Row {
    double n_eff, cost, final_norm;
    bool geometric;
    std::string trace;
  };
  std::vector<Row> rows(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    ControlConfig local = c;
    local.omega = sw.omegas[jobs[i].omega];
    const auto u0 = initial_state(local, jobs[i].seed);
    const auto r = control::synthesize(u0, basis, local.omega, c.T, mu0, c.stages, c.samples_per_phase);
    const auto a = control::cost_audit(r);
    rows[i] = {a.N_eff, r.cost_total, r.final_state.norm(), a.geometric_after_peak, trace_text(r)};
  });
  std::ostringstream os;
  os << "run,seed,omega_measure,N_eff,cost_total,final_norm,geometric_after_peak\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    csv::write_row(os, {static_cast<long long>(i), std::to_string(jobs[i].seed), measure(sw.omegas[jobs[i].omega]),
                        rows[i].n_eff, rows[i].cost, rows[i].final_norm,
                        static_cast<long long>(rows[i].geometric ? 1 : 0)});
    std::ostringstream name;
    name << "sweep_run_" << i << ".csv";
    sink.emit(name.str(), rows[i].trace, false);
  }
  sink.emit("sweep.csv", os.str(), true);
  sink.summary(err) << "runs=" << jobs.size() << '\n';
  return kSuccess;
}

}  // namespace

// ---------------------------------------------------------------------------

double parse_real(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }), s.end());
  double scale = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    scale = std::numbers::pi;
    s.erase(s.size() - 2);
    if (s.empty()) return scale;
    if (s.back() == '*') s.pop_back();
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("not a number: '" + text + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ValidationError("not a number: '" + text + "'");
  return v * scale;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item));
  if (out.empty()) throw ValidationError("empty list");
  return out;
}

sets::MeasurableSet1D parse_omega(const std::string& text) {
  std::vector<sets::Interval> pieces;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("omega pieces are written lo:hi");
    pieces.push_back({parse_real(item.substr(0, colon)), parse_real(item.substr(colon + 1))});
  }
  if (pieces.empty()) throw ValidationError("omega is empty");
  return sets::MeasurableSet1D(std::move(pieces));
}

ExperimentConfig parse_config(const std::string& toml_text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ": " << e.description() << " at line " << e.source().begin.line;
    throw ValidationError(os.str());
  }
  check_keys(root, source, {"seed", "out", "smallness", "spectral", "control", "sweep"});
  ExperimentConfig cfg;
  if (const toml::node* n = root.get("seed")) {
    const long long s = as_integer(*n, "seed");
    if (s < 0) fail("seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (const toml::node* n = root.get("out")) {
    auto s = n->value<std::string>();
    if (!s) fail("out", "expected a string");
    cfg.out = *s;
  }
  auto table = [&](const char* name) -> const toml::table* {
    const toml::node* n = root.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) fail(name, "expected a table");
    return n->as_table();
  };
  if (const toml::table* t = table("smallness")) {
    check_keys(*t, "smallness", {"trials", "trig_fraction", "max_degree", "max_modes", "points_per_unit_1d",
                                 "points_per_unit_2d", "directions"});
    SmallnessConfig c;
    if (auto* n = t->get("trials")) c.trials = static_cast<int>(as_integer(*n, "smallness.trials"));
    if (auto* n = t->get("trig_fraction")) c.trig_fraction = as_real(*n, "smallness.trig_fraction");
    if (auto* n = t->get("max_degree")) c.max_degree = static_cast<int>(as_integer(*n, "smallness.max_degree"));
    if (auto* n = t->get("max_modes")) c.max_modes = static_cast<int>(as_integer(*n, "smallness.max_modes"));
    if (auto* n = t->get("points_per_unit_1d")) c.points_per_unit_1d = as_real(*n, "smallness.points_per_unit_1d");
    if (auto* n = t->get("points_per_unit_2d")) c.points_per_unit_2d = as_real(*n, "smallness.points_per_unit_2d");
    if (auto* n = t->get("directions")) c.directions = static_cast<int>(as_integer(*n, "smallness.directions"));
    cfg.smallness = c;
  }
  if (const toml::table* t = table("spectral")) {
    check_keys(*t, "spectral", {"omega", "mu", "modes", "density", "method"});
    SpectralConfig c;
    if (auto* n = t->get("omega")) c.omega = omega_from(*n, "spectral.omega");
    if (auto* n = t->get("mu")) c.mu = real_list(*n, "spectral.mu");
    if (auto* n = t->get("modes")) c.modes = static_cast<int>(as_integer(*n, "spectral.modes"));
    if (auto* n = t->get("density")) c.density = density_from(*n, "spectral.density");
    if (auto* n = t->get("method")) {
      auto s = n->value<std::string>();
      if (!s) fail("spectral.method", "expected a string");
      c.method = *s;
    }
    cfg.spectral = c;
  }
  if (const toml::table* t = table("control")) {
    check_keys(*t, "control", {"omega", "T", "mu0", "stages", "modes", "u0", "samples_per_phase", "cross_validate",
                               "grid", "dt", "snapshots", "density"});
    ControlConfig c;
    if (auto* n = t->get("omega")) c.omega = omega_from(*n, "control.omega");
    if (auto* n = t->get("T")) c.T = as_real(*n, "control.T");
    if (auto* n = t->get("mu0")) c.mu0 = as_real(*n, "control.mu0");
    if (auto* n = t->get("stages")) c.stages = static_cast<int>(as_integer(*n, "control.stages"));
    if (auto* n = t->get("modes")) c.modes = static_cast<int>(as_integer(*n, "control.modes"));
    if (auto* n = t->get("u0")) {
      auto s = n->value<std::string>();
      if (!s) fail("control.u0", "expected a string");
      c.u0 = *s;
    }
    if (auto* n = t->get("samples_per_phase")) {
      c.samples_per_phase = static_cast<int>(as_integer(*n, "control.samples_per_phase"));
    }
    if (auto* n = t->get("cross_validate")) {
      auto b = n->value<bool>();
      if (!b) fail("control.cross_validate", "expected a boolean");
      c.cross_validate = *b;
    }
    if (auto* n = t->get("grid")) c.grid = static_cast<int>(as_integer(*n, "control.grid"));
    if (auto* n = t->get("dt")) c.dt = as_real(*n, "control.dt");
    if (auto* n = t->get("snapshots")) c.snapshots = real_list(*n, "control.snapshots");
    if (auto* n = t->get("density")) c.density = density_from(*n, "control.density");
    cfg.control = c;
  }
  if (const toml::table* t = table("sweep")) {
    check_keys(*t, "sweep", {"omegas", "seeds"});
    SweepConfig c;
    if (auto* n = t->get("omegas")) {
      const toml::array* arr = n->as_array();
      if (!arr) fail("sweep.omegas", "expected an array of sets");
      for (const toml::node& e : *arr) c.omegas.push_back(omega_from(e, "sweep.omegas"));
    }
    if (auto* n = t->get("seeds")) {
      const toml::array* arr = n->as_array();
      if (!arr) fail("sweep.seeds", "expected an array of integers");
      for (const toml::node& e : *arr) {
        const long long s = as_integer(e, "sweep.seeds");
        if (s < 0) fail("sweep.seeds", "must be >= 0");
        c.seeds.push_back(static_cast<std::uint64_t>(s));
      }
    }
    cfg.sweep = c;
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path);
}

void validate(const ExperimentConfig& config) {
  if (config.smallness) validate_smallness(*config.smallness);
  if (config.spectral) validate_spectral(*config.spectral);
  if (config.sweep) {
    if (!config.control) throw ValidationError("sweep needs a [control] table");
    if (config.sweep->omegas.empty()) throw ValidationError("sweep.omegas needs at least one set");
    if (config.sweep->seeds.empty()) throw ValidationError("sweep.seeds needs at least one seed");
    for (const auto& w : config.sweep->omegas) {
      if (w.empty() || !(measure(w) > 0.0)) throw ValidationError("sweep.omegas needs positive measures");
    }
    ControlConfig c = *config.control;
    c.omega = config.sweep->omegas.front();
    validate_control(c);
  } else if (config.control) {
    validate_control(*config.control);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Propagation-of-smallness certificates, spectral inequalities and heat null controls"};
  app.footer(kHelpFooter);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "TOML experiment config");
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory (default: primary CSV to stdout)");

  auto* sv = app.add_subcommand("smallness-verify", "randomized soundness check of the propagation bound");
  std::optional<int> trials;
  std::optional<double> trig_fraction;
  sv->add_option("--trials", trials, "number of trials");
  sv->add_option("--trig-fraction", trig_fraction, "share of 2D trig-exponential trials");

  auto* sp = app.add_subcommand("spectral-ineq", "observability constants of the low modes on omega");
  std::optional<std::string> sp_omega, mu_list;
  std::optional<int> sp_modes;
  sp->add_option("--omega", sp_omega, "control set, e.g. 0.3:0.5");
  sp->add_option("--mu-list", mu_list, "frequency cut-offs, e.g. 8pi,12pi");
  sp->add_option("--modes", sp_modes, "basis size J");

  auto* cr = app.add_subcommand("control-run", "stagewise null control of the heat equation");
  std::optional<std::string> cr_omega, u0;
  std::optional<std::string> T, mu0;
  std::optional<int> stages, cr_modes;
  bool cross = false;
  cr->add_option("--omega", cr_omega, "control set, e.g. 0.1:0.15,0.4:0.5");
  cr->add_option("--T", T, "horizon");
  cr->add_option("--mu0", mu0, "first cut-off frequency, e.g. 4pi");
  cr->add_option("--stages", stages, "number of stages K");
  cr->add_option("--modes", cr_modes, "basis size J");
  cr->add_option("--u0", u0, "random | mode:j | file:PATH");
  cr->add_flag("--cross-validate", cross, "compare with Crank-Nicolson");

  auto* sw = app.add_subcommand("sweep", "parallel control runs over [sweep] sets and seeds");
  auto* va = app.add_subcommand("validate", "check a config without running it");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.out = *out_dir;

    if (sv->parsed()) {
      if (!cfg.smallness) cfg.smallness = SmallnessConfig{};
      if (trials) cfg.smallness->trials = *trials;
      if (trig_fraction) cfg.smallness->trig_fraction = *trig_fraction;
    }
    if (sp->parsed()) {
      if (!cfg.spectral) cfg.spectral = SpectralConfig{};
      if (sp_omega) cfg.spectral->omega = parse_omega(*sp_omega);
      if (mu_list) cfg.spectral->mu = parse_real_list(*mu_list);
      if (sp_modes) cfg.spectral->modes = *sp_modes;
    }
    if (cr->parsed()) {
      if (!cfg.control) cfg.control = ControlConfig{};
      ControlConfig& c = *cfg.control;
      if (cr_omega) c.omega = parse_omega(*cr_omega);
      if (T) c.T = parse_real(*T);
      if (mu0) c.mu0 = parse_real(*mu0);
      if (stages) c.stages = *stages;
      if (cr_modes) c.modes = *cr_modes;
      if (u0) c.u0 = *u0;
      if (cross) c.cross_validate = true;
    }
    if (sw->parsed() && (!cfg.sweep || !cfg.control)) throw ValidationError("sweep needs [control] and [sweep] tables");
    validate(cfg);
    if (va->parsed()) {
      out << "ok\n";
      return kSuccess;
    }
    Sink sink(cfg.out, out);
    if (sv->parsed()) return run_smallness(cfg, sink, err);
    if (sp->parsed()) return run_spectral(cfg, sink, err);
    if (cr->parsed()) return run_control(cfg, sink, err);
    return run_sweep(cfg, sink, err);
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalid;
  }
}

}  // namespace nullctl::cli
