#pragma once

// Constructive propagation of smallness for real-analytic functions observed
// on measurable sets: three-circle interpolation, polynomial interpolation on
// a set of positive measure, chains of three-circle steps along an interval,
// the spherical (ray) reduction, and a small algebra of certificates
//
//   ||f||_target <= N * data^theta * M^(1-theta).

#include "nullctl/sets.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace nullctl::smallness {

/// Taylor-coefficient bound |d^a f(x)| <= M |a|! / (rho R)^|a| for x in the
/// ball of radius 2R around center.
struct AnalyticBound {
  double M = 1.0;
  double rho = 1.0;
  double R = 1.0;
  sets::Point2 center{};

  double derivative_radius() const { return rho * R; }

  /// Interval form |f^(k)(x)| <= M k! (2 rho)^-k on [0,1].
  static AnalyticBound on_unit_interval(double M, double rho) { return {M, rho, 2.0, {}}; }

  /// Throws ValidationError unless M > 0, 0 < rho <= 1, R > 0.
  void validate() const;
};

/// ||f||_target <= N * data^theta * M^(1-theta)
struct Certificate {
  double N = 1.0;
  double theta = 1.0;

  static Certificate identity() { return {1.0, 1.0}; }
  double apply(double data, double M) const;
  void validate() const;
};

/// If A <= N1 B^t1 M^(1-t1) and B <= N2 C^t2 M^(1-t2) then
/// A <= (N1 N2^t1) C^(t1 t2) M^(1 - t1 t2).
Certificate compose(const Certificate& outer, const Certificate& inner);

struct ThreeCircle {
  double bound = 0.0;
  double theta = 1.0;
};

/// Hadamard: sup over radius r <= m1^theta m2^(1-theta) with
/// theta = log(r2/r) / log(r2/r1), for 0 < r1 <= r <= r2.
ThreeCircle three_circle_bound(double m1, double m2, double r1, double r, double r2);

inline constexpr int kLemma1MaxOrder = 400;

struct Lemma1Scan {
  double bound = 0.0;
  int n_star = 0;
};

/// min over n in [0, n_max] of eps (3/|E|)^n + 2 (7/8)^n.
/// For |g| <= 1 on B_1 and E in [-1/5, 1/5] this bounds ||g|| on B_{1/2}
/// given ||g||_E <= eps.
Lemma1Scan lemma1_bound(double eps, double measure_e, int n_max = kLemma1MaxOrder);

/// Closed-form (N, gamma) with gamma = log(8/7) / log(24 / (7|E|)) and
/// N = 2 (3/|E| + 1) 2^-gamma, so that lemma1_bound(eps, |E|) <= N eps^gamma
/// for 0 < eps <= 2.
Certificate lemma1_certificate(double measure_e);

/// ceil(log(2/eps) / log(24 / (7|E|))): the order behind lemma1_certificate.
int lemma1_certificate_order(double eps, double measure_e);

/// log(4/3) / log 2: the exponent of one chain step with radii
/// (rho/2, 3rho/4, rho).
double chain_step_theta();

/// ceil(4 / rho) chain steps cover [0,1] from any starting point.
int chain_step_count(double rho);

inline constexpr int kMaxChainSteps = 1'000'000;

struct Lemma2Result {
  double bound = 0.0;         // bound on ||f||_inf([0,1])
  Certificate certificate;    // relative to eps and M
  double local_bound = 0.0;   // bound on B(x0, rho/2)
  sets::Subinterval cell;     // best_subinterval choice
  double x0 = 0.0;            // centre of the cell
  double rescaled_measure = 0.0;  // |E'|, E' = (E ∩ I - x0)/rho in [-1/5,1/5]
  int n_star = 0;
  int chain_steps = 0;        // K = ceil(4/rho)
  int steps_used = 0;         // longest chain actually walked
};

/// Interval estimate: for f with |f^(k)| <= M k! (2rho)^-k on [0,1] (see
/// AnalyticBound::on_unit_interval; in general rho = ab.derivative_radius()/2)
/// and ||f||_E <= eps, bounds ||f||_inf([0,1]).
/// Throws DegenerateCertificate if the chain would need more than
/// kMaxChainSteps steps.
Lemma2Result lemma2_bound(const AnalyticBound& ab, const sets::MeasurableSet1D& e, double eps);

/// Uniform certificate of the interval estimate for every E whose rescaled
/// measure |E'| is at least the given value.
Certificate lemma2_certificate(double rho, double rescaled_measure);

// ---------------------------------------------------------------------------
// Chebyshev subset

struct ChebyshevAudit {
  std::uint64_t calls = 0;
  std::uint64_t violations = 0;
};

/// Process-wide count of chebyshev_subset invocations and postcondition
/// violations.
ChebyshevAudit chebyshev_audit();

struct ChebyshevSubset1D {
  sets::MeasurableSet1D subset;  // union of the selected grid cells
  double average = 0.0;          // grid average of |f| over E
  double cap = 0.0;              // 2 * average
  double grid_measure = 0.0;
  double subset_measure = 0.0;
  double sup_on_subset = 0.0;    // max sampled |f| over the subset
};

/// cells[i] carries the sampled |f| abs_values[i]; weights are cell lengths.
/// Selects {|f|/2 <= average}. Asserts subset_measure >= grid_measure / 2
/// and sup_on_subset <= cap, throwing NumericalError if either fails.
ChebyshevSubset1D chebyshev_subset(std::span<const sets::Interval> cells,
                                   std::span<const double> abs_values, sets::Interval ambient);

struct ChebyshevSubset2D {
  sets::RectSet2D subset;
  double average = 0.0;
  double cap = 0.0;
  double grid_measure = 0.0;
  double subset_measure = 0.0;
  double sup_on_subset = 0.0;
};

ChebyshevSubset2D chebyshev_subset(std::span<const sets::Rect> cells,
                                   std::span<const double> abs_values);

/// Uniform cells covering every interval of E, about points_per_unit per
/// unit length (at least one cell per interval).
std::vector<sets::Interval> uniform_cells(const sets::MeasurableSet1D& e, double points_per_unit);

/// Same per rectangle; the rectangles of E must not overlap.
std::vector<sets::Rect> uniform_cells(const sets::RectSet2D& e, double points_per_unit);

// ---------------------------------------------------------------------------
// Test functions

/// Closed-form test functions with verifiable analyticity bounds.
struct TestFunction {
  enum class Kind { polynomial, trig_exponential };

  Kind kind = Kind::polynomial;
  /// polynomial: monomial coefficients in (x - center); trig: a_j
  std::vector<double> coefficients;
  /// trig: b_j
  std::vector<double> decaying;
  /// trig: omega_j
  std::vector<double> frequencies;
  double center = 0.0;

  static TestFunction polynomial(std::vector<double> coefficients, double center = 0.0);
  /// u(x,y) = sum_j (a_j e^{w_j y} + b_j e^{-w_j y}) sqrt(2) sin(w_j x)
  static TestFunction mode_sum(std::vector<double> a, std::vector<double> b,
                               std::vector<double> frequencies);

  int dimension() const { return kind == Kind::polynomial ? 1 : 2; }
  double operator()(double x) const;
  double operator()(sets::Point2 p) const;
};

/// Verified bound for a polynomial on the ball of radius 2R around its center:
/// M = max_k sum_i |c_i| C(i,k) (rho R)^k (2R)^(i-k).
AnalyticBound taylor_bound_of_polynomial(const TestFunction& p, double R, double rho);

/// M = sum_j (|a_j| + |b_j|) sqrt(2) e^{5 w_j}, rho = min(1, 1/(2 w_max R)).
/// Valid where |y| <= 5; throws ValidationError for an empty mode list, a
/// ball B_{2R}(center) leaving the strip, or all-zero coefficients.
AnalyticBound taylor_bound_of_mode_sum(std::span<const double> a, std::span<const double> b,
                                       std::span<const double> frequencies, double R = 1.0,
                                       sets::Point2 center = {});

// ---------------------------------------------------------------------------
// Propagation from a measurable set to a ball

struct Theorem3Options {
  double points_per_unit_1d = 16384.0;
  double points_per_unit_2d = 128.0;
  int directions = 256;
  /// base-point spacing in units of rho R (2D only); also the Taylor ratio q
  double base_spacing = 0.5;
};

struct Theorem3Result {
  double bound = 0.0;              // bound on ||f||_inf(B_{R/2}(center))
  Certificate certificate;         // relative to data and M
  double data = 0.0;               // cap + grid slack: the data the certificate consumes
  double certificate_bound = 0.0;  // certificate.apply(data, M)
  double average = 0.0;            // grid average of |f| over E
  double cap = 0.0;                // 2 * average
  double set_measure = 0.0;        // |E| (grid)
  double subset_measure = 0.0;     // |E~|
  int base_points = 0;
  double continuity_term = 0.0;    // 2D: M q / (1 - q)
  double min_trace = 0.0;          // smallest best-direction trace over base points
};

/// 1D: Chebyshev subset of E, then the interval estimate on the segment
/// [c - R/2, c + R/2], which contains both E and the target.
Theorem3Result theorem3_bound(const AnalyticBound& ab, const sets::MeasurableSet1D& e,
                              const TestFunction& f, const Theorem3Options& options = {});

/// 2D: Chebyshev subset of E, then at every base point of a grid over
/// B_{R/2}(center) the direction maximising the trace of E~ and the interval
/// estimate along that segment; a Taylor term covers points between nodes.
Theorem3Result theorem3_bound(const AnalyticBound& ab, const sets::RectSet2D& e,
                              const TestFunction& f, const Theorem3Options& options = {});

}  // namespace nullctl::smallness
