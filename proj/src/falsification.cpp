#include "nullctl/falsification.hpp"

#include "nullctl/csv.hpp"
#include "nullctl/error.hpp"
#include "nullctl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace nullctl::smallness {

namespace {

using sets::Interval;
using sets::MeasurableSet1D;
using sets::Point2;
using sets::Rect;
using sets::RectSet2D;

constexpr int kEpsSamples = 1001;

// 1..4 disjoint intervals in [-1/2, 1/2], or a fat Cantor set in a window
MeasurableSet1D random_set_1d(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < 0.25) {
    const double len = 0.1 + 0.9 * u(rng);
    const double lo = -0.5 + (1.0 - len) * u(rng);
    const sets::FatCantorSpec spec{1 + static_cast<int>(u(rng) * 5), 0.1 + 0.2 * u(rng)};
    return sets::fat_cantor(spec, {lo, lo + len});
  }
  const int k = 1 + static_cast<int>(u(rng) * 4);
  std::vector<double> cuts(2 * k);
  for (double& c : cuts) c = -0.5 + u(rng);
  std::sort(cuts.begin(), cuts.end());
  std::vector<Interval> pieces;
  for (int i = 0; i < k; ++i) {
    const double lo = cuts[2 * i];
    const double hi = cuts[2 * i + 1];
    if (hi - lo > 1e-3 && (pieces.empty() || lo > pieces.back().hi)) pieces.push_back({lo, hi});
  }
  if (pieces.empty()) pieces.push_back({-0.05, 0.05});
  return MeasurableSet1D(std::move(pieces), {-0.5, 0.5});
}

// 1..3 rectangles in disjoint vertical strips of the square inscribed in B_{1/2}(c)
RectSet2D random_set_2d(std::mt19937_64& rng, Point2 c) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double half = 0.35;
  const int k = 1 + static_cast<int>(u(rng) * 3);
  const double strip = 2.0 * half / k;
  std::vector<Rect> rects;
  for (int i = 0; i < k; ++i) {
    const double x0 = c.x - half + i * strip;
    const double a = u(rng), b = u(rng);
    const double ya = u(rng), yb = u(rng);
    Interval x{x0 + strip * std::min(a, b), x0 + strip * std::max(a, b)};
    Interval y{c.y - half + 2.0 * half * std::min(ya, yb), c.y - half + 2.0 * half * std::max(ya, yb)};
    if (x.length() < 0.02) x.hi = std::min(x0 + strip, x.lo + 0.02);
    if (x.length() < 0.02) x.lo = x.hi - 0.02;
    if (y.length() < 0.02) y.hi = std::min(c.y + half, y.lo + 0.02);
    if (y.length() < 0.02) y.lo = y.hi - 0.02;
    // keep a gap between strips
    x.lo = std::max(x.lo, x0 + 1e-3);
    x.hi = std::min(x.hi, x0 + strip - 1e-3);
    rects.push_back({x, y});
  }
  return RectSet2D(std::move(rects));
}

TrialRecord polynomial_trial(const HarnessOptions& options, int trial, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> deg(0, options.max_degree);
  std::normal_distribution<double> nd;
  std::vector<double> coef(deg(rng) + 1);
  for (double& c : coef) c = nd(rng);
  TestFunction f = TestFunction::polynomial(coef);
  // normalise to sup <= 1 on B_1 with margin for the sampling gap
  double sup = 0.0;
  for (int i = 0; i < options.sup_points_1d; ++i) {
    sup = std::max(sup, std::abs(f(-1.0 + 2.0 * i / (options.sup_points_1d - 1))));
  }
  for (double& c : coef) c /= 1.01 * sup;
  f = TestFunction::polynomial(coef);

  const MeasurableSet1D e = random_set_1d(rng);
  const AnalyticBound ab = taylor_bound_of_polynomial(f, 1.0, 1.0);
  const Theorem3Result res = theorem3_bound(ab, e, f, options.theorem3);

  TrialRecord r;
  r.trial = trial;
  r.family = Family::polynomial;
  r.measE = measure(e);
  for (const Interval& iv : e.intervals()) {
    for (int i = 0; i < kEpsSamples; ++i) r.epsE = std::max(r.epsE, std::abs(f(iv.lo + iv.length() * i / (kEpsSamples - 1))));
  }
  for (int i = 0; i < options.sup_points_1d; ++i) {
    r.true_sup = std::max(r.true_sup, std::abs(f(-0.5 + 1.0 * i / (options.sup_points_1d - 1))));
  }
  r.bound = res.bound;
  r.margin = r.bound - r.true_sup;
  return r;
}

TrialRecord trig_trial(const HarnessOptions& options, int trial, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nd;
  const int modes = 1 + static_cast<int>(u(rng) * options.max_modes);
  std::vector<double> a(modes), b(modes), w(modes);
  for (int j = 0; j < modes; ++j) {
    a[j] = nd(rng);
    b[j] = nd(rng);
    w[j] = std::numbers::pi * (1 + static_cast<int>(u(rng) * 3));
  }
  const TestFunction f = TestFunction::mode_sum(a, b, w);
  const Point2 c{u(rng), -1.0 + 2.0 * u(rng)};
  const RectSet2D e = random_set_2d(rng, c);
  const AnalyticBound ab = taylor_bound_of_mode_sum(a, b, w, 1.0, c);
  const Theorem3Result res = theorem3_bound(ab, e, f, options.theorem3);

  TrialRecord r;
  r.trial = trial;
  r.family = Family::trig_exponential;
  for (const Rect& q : e.rects()) {
    r.measE += q.area();
    const int n = 101;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const Point2 p{q.x.lo + q.x.length() * i / (n - 1), q.y.lo + q.y.length() * j / (n - 1)};
        r.epsE = std::max(r.epsE, std::abs(f(p)));
      }
    }
  }
  const int n = options.sup_points_2d;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Point2 p{c.x - 0.5 + static_cast<double>(i) / (n - 1), c.y - 0.5 + static_cast<double>(j) / (n - 1)};
      if (std::hypot(p.x - c.x, p.y - c.y) <= 0.5) r.true_sup = std::max(r.true_sup, std::abs(f(p)));
    }
  }
  r.bound = res.bound;
  r.margin = r.bound - r.true_sup;
  return r;
}

}  // namespace

std::string family_name(Family f) { return f == Family::polynomial ? "polynomial" : "trig_exponential"; }

Family trial_family(const HarnessOptions& options, int trial) {
  return (trial % 10) < std::lround(10.0 * options.trig_fraction) ? Family::trig_exponential : Family::polynomial;
}

TrialRecord run_trial(const HarnessOptions& options, int trial) {
  std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(trial)));
  return trial_family(options, trial) == Family::polynomial ? polynomial_trial(options, trial, rng)
                                                            : trig_trial(options, trial, rng);
}

std::vector<TrialRecord> falsification_harness(const HarnessOptions& options) {
  if (options.trials < 1) throw ValidationError("harness needs at least one trial");
  if (options.max_degree < 0 || options.max_modes < 1) throw ValidationError("harness: bad family sizes");
  if (!(options.trig_fraction >= 0.0 && options.trig_fraction <= 1.0)) {
    throw ValidationError("harness: trig_fraction must lie in [0,1]");
  }
  std::vector<TrialRecord> records(options.trials);
  parallel_for(records.size(), [&](std::size_t i) { records[i] = run_trial(options, static_cast<int>(i)); });
  return records;
}

void write_harness_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "trial,family,measE,epsE,bound,true_sup,margin\n";
  for (const TrialRecord& r : records) {
    csv::write_row(out, {static_cast<long long>(r.trial), family_name(r.family), r.measE, r.epsE, r.bound,
                         r.true_sup, r.margin});
  }
}

}  // namespace nullctl::smallness
