#include "nullctl/analytic_smallness.hpp"

#include "nullctl/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace nullctl::smallness {

using sets::Interval;
using sets::MeasurableSet1D;
using sets::Point2;
using sets::Rect;
using sets::RectSet2D;

namespace {

std::atomic<std::uint64_t> g_chebyshev_calls{0};
std::atomic<std::uint64_t> g_chebyshev_violations{0};

constexpr double kContainmentSlack = 1e-12;

// sup of |f| within distance d of a point where its value is known, given
// directional derivative bounds M k! (c/(rho R))^k: M q/(1-q), q = c d/(rho R)
double taylor_slack(double M, double q) {
  if (!(q < 1.0)) throw NumericalError("grid too coarse for the analyticity radius");
  return M * q / (1.0 - q);
}

struct Selection {
  double average = 0.0;
  double cap = 0.0;
  double grid_measure = 0.0;
  double subset_measure = 0.0;
  double sup_on_subset = 0.0;
  std::vector<char> keep;
};

Selection select_cells(std::span<const double> weights, std::span<const double> values) {
  if (weights.size() != values.size()) {
    throw ValidationError("chebyshev_subset: one value per cell required");
  }
  if (weights.empty()) throw ValidationError("chebyshev_subset: empty grid");
  Selection s;
  double weighted = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(values[i] >= 0.0)) throw ValidationError("chebyshev_subset: values must be |f| >= 0");
    s.grid_measure += weights[i];
    weighted += weights[i] * values[i];
  }
  if (!(s.grid_measure > 0.0)) throw ValidationError("chebyshev_subset: |E| must be positive");
  s.average = weighted / s.grid_measure;
  s.cap = 2.0 * s.average;
  s.keep.assign(weights.size(), 0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (values[i] / 2.0 <= s.average) {
      s.keep[i] = 1;
      s.subset_measure += weights[i];
      s.sup_on_subset = std::max(s.sup_on_subset, values[i]);
    }
  }
  ++g_chebyshev_calls;
  if (s.subset_measure < 0.5 * s.grid_measure || s.sup_on_subset > s.cap) {
    ++g_chebyshev_violations;
    std::ostringstream os;
    os << "chebyshev_subset postcondition failed: |E~| = " << s.subset_measure
       << ", |E| = " << s.grid_measure << ", sup = " << s.sup_on_subset << ", cap = " << s.cap;
    throw NumericalError(os.str());
  }
  return s;
}

std::vector<double> edges(const Interval& side, int n) {
  std::vector<double> x(n + 1);
  const double h = side.length() / n;
  for (int i = 0; i < n; ++i) x[i] = side.lo + i * h;
  x[n] = side.hi;
  return x;
}

int cell_count(double length, double points_per_unit) {
  return std::max(1, static_cast<int>(std::ceil(length * points_per_unit - 1e-9)));
}

// measure of {t in [0,1] : from + t(to - from) in E}, without building the set
double trace_measure(const RectSet2D& e, Point2 from, Point2 to, std::vector<Interval>& scratch) {
  scratch.clear();
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  for (const Rect& r : e.rects()) {
    double t0 = 0.0;
    double t1 = 1.0;
    if (dx != 0.0) {
      double a = (r.x.lo - from.x) / dx;
      double b = (r.x.hi - from.x) / dx;
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
    } else if (!r.x.contains(from.x)) {
      continue;
    }
    if (t0 > t1) continue;
    if (dy != 0.0) {
      double a = (r.y.lo - from.y) / dy;
      double b = (r.y.hi - from.y) / dy;
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
    } else if (!r.y.contains(from.y)) {
      continue;
    }
    if (t0 < t1) scratch.push_back({t0, t1});
  }
  if (scratch.empty()) return 0.0;
  std::sort(scratch.begin(), scratch.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  double total = 0.0;
  Interval run = scratch.front();
  for (std::size_t i = 1; i < scratch.size(); ++i) {
    if (scratch[i].lo <= run.hi) {
      run.hi = std::max(run.hi, scratch[i].hi);
    } else {
      total += run.length();
      run = scratch[i];
    }
  }
  return total + run.length();
}

}  // namespace

// ---------------------------------------------------------------------------

void AnalyticBound::validate() const {
  if (!(M > 0.0) || !std::isfinite(M)) throw ValidationError("AnalyticBound: M must be positive");
  if (!(rho > 0.0 && rho <= 1.0)) throw ValidationError("AnalyticBound: rho must lie in (0,1]");
  if (!(R > 0.0)) throw ValidationError("AnalyticBound: R must be positive");
}

double Certificate::apply(double data, double M) const {
  if (data <= 0.0) return theta < 1.0 ? 0.0 : N * data;
  return N * std::exp(theta * std::log(data) + (1.0 - theta) * std::log(M));
}

void Certificate::validate() const {
  if (!(N >= 1.0)) throw ValidationError("Certificate: N must be >= 1");
  if (!(theta > 0.0 && theta <= 1.0)) throw ValidationError("Certificate: theta must lie in (0,1]");
}

Certificate compose(const Certificate& outer, const Certificate& inner) {
  return {outer.N * std::pow(inner.N, outer.theta), outer.theta * inner.theta};
}

ThreeCircle three_circle_bound(double m1, double m2, double r1, double r, double r2) {
  if (!(r1 > 0.0 && r1 <= r && r <= r2)) {
    throw ValidationError("three_circle_bound needs 0 < r1 <= r <= r2");
  }
  if (!(m1 >= 0.0 && m2 >= 0.0)) throw ValidationError("three_circle_bound needs m1, m2 >= 0");
  ThreeCircle out;
  out.theta = (r2 == r1) ? 1.0 : std::log(r2 / r) / std::log(r2 / r1);
  if (out.theta == 1.0) {
    out.bound = m1;
  } else if (out.theta == 0.0) {
    out.bound = m2;
  } else {
    out.bound = std::pow(m1, out.theta) * std::pow(m2, 1.0 - out.theta);
  }
  return out;
}

// ---------------------------------------------------------------------------

Lemma1Scan lemma1_bound(double eps, double measure_e, int n_max) {
  if (!(eps >= 0.0)) throw ValidationError("lemma1_bound needs eps >= 0");
  if (!(measure_e > 0.0 && measure_e <= 0.4 + kContainmentSlack)) {
    throw ValidationError("lemma1_bound needs 0 < |E| <= 2/5");
  }
  if (n_max < 0) throw ValidationError("lemma1_bound needs n_max >= 0");
  const double log_growth = std::log(3.0 / measure_e);
  const double log_decay = std::log(7.0 / 8.0);
  const double log_eps = eps > 0.0 ? std::log(eps) : 0.0;
  Lemma1Scan best{std::numeric_limits<double>::infinity(), 0};
  for (int n = 0; n <= n_max; ++n) {
    const double first = eps > 0.0 ? std::exp(log_eps + n * log_growth) : 0.0;
    const double value = first + 2.0 * std::exp(n * log_decay);
    if (value < best.bound) best = {value, n};
  }
  return best;
}

Certificate lemma1_certificate(double measure_e) {
  if (!(measure_e > 0.0 && measure_e <= 0.4 + kContainmentSlack)) {
    throw ValidationError("lemma1_certificate needs 0 < |E| <= 2/5");
  }
  const double gamma = std::log(8.0 / 7.0) / std::log(24.0 / (7.0 * measure_e));
  return {2.0 * (3.0 / measure_e + 1.0) * std::pow(2.0, -gamma), gamma};
}

int lemma1_certificate_order(double eps, double measure_e) {
  if (!(eps > 0.0)) throw ValidationError("lemma1_certificate_order needs eps > 0");
  return std::max(0, static_cast<int>(std::ceil(std::log(2.0 / eps) /
                                                std::log(24.0 / (7.0 * measure_e)))));
}

double chain_step_theta() { return std::log(4.0 / 3.0) / std::log(2.0); }

int chain_step_count(double rho) {
  if (!(rho > 0.0)) throw ValidationError("chain_step_count needs rho > 0");
  const double k = std::ceil(4.0 / rho - 1e-9);
  if (k > kMaxChainSteps) {
    std::ostringstream os;
    os << "three-circle chain needs " << k << " steps (rho = " << rho << ")";
    throw DegenerateCertificate(os.str());
  }
  return static_cast<int>(k);
}

Certificate lemma2_certificate(double rho, double rescaled_measure) {
  const int K = chain_step_count(rho);
  const Certificate l1 = lemma1_certificate(std::min(0.4, rescaled_measure));
  const Certificate local{std::pow(2.0, 1.0 - l1.theta) * l1.N, l1.theta};
  const double t = std::pow(chain_step_theta(), K);
  return compose({std::pow(2.0, 1.0 - t), t}, local);
}

Lemma2Result lemma2_bound(const AnalyticBound& ab, const MeasurableSet1D& e, double eps) {
  ab.validate();
  if (!(eps >= 0.0)) throw ValidationError("lemma2_bound needs eps >= 0");
  if (!(e.ambient() == Interval{0.0, 1.0})) throw ValidationError("lemma2_bound needs E in [0,1]");
  if (!(measure(e) > 0.0)) throw ValidationError("lemma2_bound needs |E| > 0");
  const double rho = std::min(1.0, 0.5 * ab.derivative_radius());
  const double two_m = 2.0 * ab.M;

  Lemma2Result out;
  out.chain_steps = chain_step_count(rho);
  out.cell = sets::best_subinterval(e, rho);
  out.x0 = out.cell.cell.midpoint();
  const MeasurableSet1D local =
      e.intersect(out.cell.cell).rescaled(out.x0, 1.0 / rho, {-0.2, 0.2});
  out.rescaled_measure = std::min(0.4, measure(local));

  // g = f(x0 + rho z) / 2M has |g| <= 1 on B_1 and |g| <= eps/2M on E'
  int n_max = kLemma1MaxOrder;
  Lemma1Scan scan;
  for (;;) {
    scan = lemma1_bound(eps / two_m, out.rescaled_measure, n_max);
    try {
      sets::greedy_nodes(local, scan.n_star);
      break;
    } catch (const InfeasibleNodes&) {
      if (scan.n_star == 0) throw;
      n_max = scan.n_star - 1;
    }
  }
  out.n_star = scan.n_star;
  out.local_bound = two_m * scan.bound;

  // walk B(c, rho/2) -> B(c, 3rho/4) in steps of rho/4 until [0,1] is covered
  const double a0 = std::min(out.local_bound, two_m);
  auto walk = [&](double distance) {
    const int steps =
        std::max(0, static_cast<int>(std::ceil((distance - 0.5 * rho) / (0.25 * rho) - 1e-12)));
    double a = a0;
    for (int j = 0; j < steps; ++j) a = three_circle_bound(a, two_m, 0.5 * rho, 0.75 * rho, rho).bound;
    out.steps_used = std::max(out.steps_used, steps);
    return a;
  };
  const double left = walk(out.x0);
  const double right = walk(1.0 - out.x0);
  if (out.steps_used > out.chain_steps) throw NumericalError("chain exceeded its step budget");
  out.bound = std::max(left, right);
  out.certificate = lemma2_certificate(rho, out.rescaled_measure);
  return out;
}

// ---------------------------------------------------------------------------

ChebyshevAudit chebyshev_audit() { return {g_chebyshev_calls.load(), g_chebyshev_violations.load()}; }

ChebyshevSubset1D chebyshev_subset(std::span<const Interval> cells, std::span<const double> abs_values,
                                   Interval ambient) {
  std::vector<double> weights(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) weights[i] = cells[i].length();
  Selection s = select_cells(weights, abs_values);
  std::vector<Interval> kept;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (s.keep[i]) kept.push_back(cells[i]);
  }
  ChebyshevSubset1D out;
  out.subset = MeasurableSet1D::from_unsorted(std::move(kept), ambient);
  out.average = s.average;
  out.cap = s.cap;
  out.grid_measure = s.grid_measure;
  out.subset_measure = s.subset_measure;
  out.sup_on_subset = s.sup_on_subset;
  return out;
}

ChebyshevSubset2D chebyshev_subset(std::span<const Rect> cells, std::span<const double> abs_values) {
  std::vector<double> weights(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) weights[i] = cells[i].area();
  Selection s = select_cells(weights, abs_values);

  // fuse horizontal runs, then stack identical runs vertically
  std::vector<Rect> kept;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (s.keep[i]) kept.push_back(cells[i]);
  }
  auto by_row = [](const Rect& a, const Rect& b) {
    if (a.y.lo != b.y.lo) return a.y.lo < b.y.lo;
    if (a.y.hi != b.y.hi) return a.y.hi < b.y.hi;
    return a.x.lo < b.x.lo;
  };
  std::sort(kept.begin(), kept.end(), by_row);
  std::vector<Rect> runs;
  for (const Rect& c : kept) {
    if (!runs.empty() && runs.back().y == c.y && runs.back().x.hi == c.x.lo) {
      runs.back().x.hi = c.x.hi;
    } else {
      runs.push_back(c);
    }
  }
  std::map<std::pair<double, double>, std::vector<Interval>> columns;
  for (const Rect& r : runs) columns[{r.x.lo, r.x.hi}].push_back(r.y);
  std::vector<Rect> merged;
  for (auto& [x, ys] : columns) {
    std::sort(ys.begin(), ys.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    Interval run = ys.front();
    for (std::size_t i = 1; i < ys.size(); ++i) {
      if (ys[i].lo == run.hi) {
        run.hi = ys[i].hi;
      } else {
        merged.push_back({{x.first, x.second}, run});
        run = ys[i];
      }
    }
    merged.push_back({{x.first, x.second}, run});
  }

  ChebyshevSubset2D out;
  out.subset = RectSet2D(std::move(merged));
  out.average = s.average;
  out.cap = s.cap;
  out.grid_measure = s.grid_measure;
  out.subset_measure = s.subset_measure;
  out.sup_on_subset = s.sup_on_subset;
  return out;
}

std::vector<Interval> uniform_cells(const MeasurableSet1D& e, double points_per_unit) {
  if (!(points_per_unit > 0.0)) throw ValidationError("grid resolution must be positive");
  std::vector<Interval> cells;
  for (const Interval& part : e.intervals()) {
    if (!(part.length() > 0.0)) continue;
    const auto x = edges(part, cell_count(part.length(), points_per_unit));
    for (std::size_t i = 0; i + 1 < x.size(); ++i) cells.push_back({x[i], x[i + 1]});
  }
  return cells;
}

std::vector<Rect> uniform_cells(const RectSet2D& e, double points_per_unit) {
  if (!(points_per_unit > 0.0)) throw ValidationError("grid resolution must be positive");
  double total = 0.0;
  for (const Rect& r : e.rects()) total += r.area();
  if (std::abs(total - e.area()) > 1e-12 * std::max(1.0, total)) {
    throw ValidationError("rectangles of E must not overlap");
  }
  std::vector<Rect> cells;
  for (const Rect& r : e.rects()) {
    if (!(r.area() > 0.0)) continue;
    const auto x = edges(r.x, cell_count(r.x.length(), points_per_unit));
    const auto y = edges(r.y, cell_count(r.y.length(), points_per_unit));
    for (std::size_t j = 0; j + 1 < y.size(); ++j) {
      for (std::size_t i = 0; i + 1 < x.size(); ++i) cells.push_back({{x[i], x[i + 1]}, {y[j], y[j + 1]}});
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------

TestFunction TestFunction::polynomial(std::vector<double> coefficients, double center) {
  if (coefficients.empty()) throw ValidationError("polynomial needs at least one coefficient");
  TestFunction f;
  f.kind = Kind::polynomial;
  f.coefficients = std::move(coefficients);
  f.center = center;
  return f;
}

TestFunction TestFunction::mode_sum(std::vector<double> a, std::vector<double> b,
                                    std::vector<double> frequencies) {
  if (frequencies.empty()) throw ValidationError("mode sum needs at least one mode");
  if (a.size() != frequencies.size() || b.size() != frequencies.size()) {
    throw ValidationError("mode sum: a, b and frequencies must have equal length");
  }
  TestFunction f;
  f.kind = Kind::trig_exponential;
  f.coefficients = std::move(a);
  f.decaying = std::move(b);
  f.frequencies = std::move(frequencies);
  return f;
}

double TestFunction::operator()(double x) const {
  if (kind != Kind::polynomial) throw ValidationError("mode sums are evaluated at points of the plane");
  double acc = 0.0;
  const double t = x - center;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * t + *it;
  return acc;
}

double TestFunction::operator()(Point2 p) const {
  if (kind != Kind::trig_exponential) throw ValidationError("polynomials are evaluated on the line");
  double acc = 0.0;
  for (std::size_t j = 0; j < frequencies.size(); ++j) {
    const double w = frequencies[j];
    acc += (coefficients[j] * std::exp(w * p.y) + decaying[j] * std::exp(-w * p.y)) *
           std::numbers::sqrt2 * std::sin(w * p.x);
  }
  return acc;
}

AnalyticBound taylor_bound_of_polynomial(const TestFunction& p, double R, double rho) {
  if (p.kind != TestFunction::Kind::polynomial) throw ValidationError("expected a polynomial");
  if (!(R > 0.0) || !(rho > 0.0 && rho <= 1.0)) throw ValidationError("need R > 0, 0 < rho <= 1");
  const int degree = static_cast<int>(p.coefficients.size()) - 1;
  double M = 0.0;
  for (int k = 0; k <= degree; ++k) {
    double sum = 0.0;
    double binom = 1.0;  // C(i, k), starting at i = k
    for (int i = k; i <= degree; ++i) {
      if (i > k) binom *= static_cast<double>(i) / (i - k);
      sum += std::abs(p.coefficients[i]) * binom * std::pow(rho * R, k) * std::pow(2.0 * R, i - k);
    }
    M = std::max(M, sum);
  }
  if (!(M > 0.0)) throw ValidationError("zero polynomial has no positive analyticity bound");
  return {M, rho, R, {p.center, 0.0}};
}

AnalyticBound taylor_bound_of_mode_sum(std::span<const double> a, std::span<const double> b,
                                       std::span<const double> frequencies, double R, Point2 center) {
  if (frequencies.empty()) throw ValidationError("taylor_bound_of_mode_sum: empty mode list");
  if (a.size() != frequencies.size() || b.size() != frequencies.size()) {
    throw ValidationError("taylor_bound_of_mode_sum: length mismatch");
  }
  if (!(R > 0.0)) throw ValidationError("taylor_bound_of_mode_sum: R must be positive");
  if (std::abs(center.y) + 2.0 * R > 5.0 + kContainmentSlack) {
    throw ValidationError("taylor_bound_of_mode_sum: ball of radius 2R leaves the strip |y| <= 5");
  }
  double M = 0.0;
  double w_max = 0.0;
  for (std::size_t j = 0; j < frequencies.size(); ++j) {
    if (!(frequencies[j] > 0.0)) throw ValidationError("frequencies must be positive");
    M += (std::abs(a[j]) + std::abs(b[j])) * std::numbers::sqrt2 * std::exp(5.0 * frequencies[j]);
    w_max = std::max(w_max, frequencies[j]);
  }
  if (!(M > 0.0)) throw ValidationError("taylor_bound_of_mode_sum: degenerate, all coefficients zero");
  return {M, std::min(1.0, 1.0 / (2.0 * w_max * R)), R, center};
}

// ---------------------------------------------------------------------------

Theorem3Result theorem3_bound(const AnalyticBound& ab, const MeasurableSet1D& e, const TestFunction& f,
                              const Theorem3Options& options) {
  ab.validate();
  if (f.dimension() != 1) throw ValidationError("theorem3_bound: 1D set needs a 1D function");
  const Interval segment{ab.center.x - 0.5 * ab.R, ab.center.x + 0.5 * ab.R};
  if (e.empty() || e.inf() < segment.lo - kContainmentSlack || e.sup() > segment.hi + kContainmentSlack) {
    throw ValidationError("theorem3_bound: E must be a nonempty subset of B_{R/2}");
  }
  const auto cells = uniform_cells(e, options.points_per_unit_1d);
  std::vector<double> values(cells.size());
  double half_width = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    values[i] = std::abs(f(cells[i].midpoint()));
    half_width = std::max(half_width, 0.5 * cells[i].length());
  }
  const Interval padded{std::min(segment.lo, e.inf()), std::max(segment.hi, e.sup())};
  const ChebyshevSubset1D tilde = chebyshev_subset(cells, values, padded);

  Theorem3Result out;
  out.average = tilde.average;
  out.cap = tilde.cap;
  out.set_measure = tilde.grid_measure;
  out.subset_measure = tilde.subset_measure;
  out.data = tilde.cap + taylor_slack(ab.M, half_width / ab.derivative_radius());
  out.base_points = 1;

  // t in [0,1] -> segment.lo + t R; derivatives gain R^k, so the interval radius is rho/2
  const MeasurableSet1D trace = tilde.subset.rescaled(segment.lo, 1.0 / ab.R, {0.0, 1.0});
  out.min_trace = measure(trace);
  const Lemma2Result l2 = lemma2_bound(AnalyticBound::on_unit_interval(ab.M, 0.5 * ab.rho), trace, out.data);
  out.bound = l2.bound;
  out.certificate = l2.certificate;
  out.certificate_bound = out.certificate.apply(out.data, ab.M);
  return out;
}

Theorem3Result theorem3_bound(const AnalyticBound& ab, const RectSet2D& e, const TestFunction& f,
                              const Theorem3Options& options) {
  ab.validate();
  if (f.dimension() != 2) throw ValidationError("theorem3_bound: 2D set needs a 2D function");
  if (options.directions < 1) throw ValidationError("theorem3_bound: need at least one direction");
  if (!(options.base_spacing > 0.0 && options.base_spacing < 1.0)) {
    throw ValidationError("theorem3_bound: base spacing must lie in (0,1)");
  }
  if (e.empty()) throw ValidationError("theorem3_bound: E must be nonempty");
  const Point2 c = ab.center;
  const double R = ab.R;
  for (const Rect& r : e.rects()) {
    for (double x : {r.x.lo, r.x.hi}) {
      for (double y : {r.y.lo, r.y.hi}) {
        if (std::hypot(x - c.x, y - c.y) > 0.5 * R + kContainmentSlack) {
          throw ValidationError("theorem3_bound: E must lie in B_{R/2}");
        }
      }
    }
  }
  const double rr = ab.derivative_radius();

  const auto cells = uniform_cells(e, options.points_per_unit_2d);
  std::vector<double> values(cells.size());
  double half_diagonal = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    values[i] = std::abs(f(Point2{cells[i].x.midpoint(), cells[i].y.midpoint()}));
    half_diagonal = std::max(half_diagonal, 0.5 * std::hypot(cells[i].x.length(), cells[i].y.length()));
  }
  const ChebyshevSubset2D tilde = chebyshev_subset(cells, values);

  Theorem3Result out;
  out.average = tilde.average;
  out.cap = tilde.cap;
  out.set_measure = tilde.grid_measure;
  out.subset_measure = tilde.subset_measure;
  // directional derivatives: |D_z^k f| <= M k! (sqrt2 / rho R)^k
  out.data = tilde.cap + taylor_slack(ab.M, std::numbers::sqrt2 * half_diagonal / rr);

  // every point of the disk is within s/sqrt2 of a kept node
  const double s = std::min(options.base_spacing * rr, 0.25 * R);
  const double reach = 0.5 * R + s / std::numbers::sqrt2;
  const double length = R + s / std::numbers::sqrt2;
  const int span = static_cast<int>(std::ceil(reach / s));
  std::vector<Point2> nodes;
  for (int j = -span; j <= span; ++j) {
    for (int i = -span; i <= span; ++i) {
      if (std::hypot(i * s, j * s) <= reach) nodes.push_back({c.x + i * s, c.y + j * s});
    }
  }
  out.base_points = static_cast<int>(nodes.size());

  std::vector<Point2> dirs(options.directions);
  for (int d = 0; d < options.directions; ++d) {
    const double phi = 2.0 * std::numbers::pi * d / options.directions;
    dirs[d] = {std::cos(phi), std::sin(phi)};
  }
  const AnalyticBound ray = AnalyticBound::on_unit_interval(
      ab.M, rr / (2.0 * std::numbers::sqrt2 * length));
  std::vector<Interval> scratch;
  double worst = 0.0;
  out.min_trace = std::numeric_limits<double>::infinity();
  for (const Point2& x : nodes) {
    double best = -1.0;
    Point2 best_end{};
    for (const Point2& z : dirs) {
      const Point2 end{x.x + length * z.x, x.y + length * z.y};
      const double m = trace_measure(tilde.subset, x, end, scratch);
      if (m > best) {
        best = m;
        best_end = end;
      }
    }
    if (!(best > 0.0)) throw NumericalError("theorem3_bound: no sampled direction meets E~");
    out.min_trace = std::min(out.min_trace, best);
    const sets::RayTrace trace = sets::segment_trace(tilde.subset, x, best_end);
    worst = std::max(worst, lemma2_bound(ray, trace.trace, out.data).bound);
  }
  out.continuity_term = taylor_slack(ab.M, s / rr);
  out.bound = worst + out.continuity_term;

  // polar coordinates about any x of the disk: some direction carries a
  // trace of measure >= |E~| / (2 pi R^2) on a segment of length R
  const double guaranteed = tilde.subset_measure / (2.0 * std::numbers::pi * R * R);
  const double rho_cert = rr / (2.0 * std::numbers::sqrt2 * R);
  const int cells_cert = static_cast<int>(std::ceil(2.5 / rho_cert - 1e-9));
  out.certificate = lemma2_certificate(rho_cert, guaranteed / (cells_cert * rho_cert));
  out.certificate_bound = out.certificate.apply(out.data, ab.M);
  return out;
}

}  // namespace nullctl::smallness
