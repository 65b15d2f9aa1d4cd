#pragma once

// Measurable control/observation sets: finite unions of closed intervals in
// 1D and of axis-aligned rectangles in 2D, plus the set-theoretic steps used
// by the propagation-of-smallness estimates.

#include <cstddef>
#include <utility>
#include <vector>

namespace nullctl::sets {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of pairwise disjoint closed intervals, sorted, inside an
/// ambient interval. The empty set is represented by an empty list.
class MeasurableSet1D {
 public:
  MeasurableSet1D() = default;

  /// Validates the invariants; throws ValidationError when the intervals are
  /// unsorted, overlapping, touching, reversed or outside the ambient.
  explicit MeasurableSet1D(std::vector<Interval> intervals, Interval ambient = {0.0, 1.0});

  /// Sorts and merges (overlapping or touching pieces are fused), then clips
  /// to the ambient interval.
  static MeasurableSet1D from_unsorted(std::vector<Interval> intervals,
                                       Interval ambient = {0.0, 1.0});

  static MeasurableSet1D empty_set(Interval ambient = {0.0, 1.0}) {
    MeasurableSet1D s;
    s.ambient_ = ambient;
    return s;
  }

  const std::vector<Interval>& intervals() const { return intervals_; }
  const Interval& ambient() const { return ambient_; }
  bool empty() const { return intervals_.empty(); }
  std::size_t size() const { return intervals_.size(); }

  double inf() const;
  double sup() const;
  bool contains(double x) const;
  bool subset_of(const MeasurableSet1D& other) const;

  MeasurableSet1D intersect(const Interval& window) const;

  /// Image under x -> (x - origin) * scale, with a new ambient interval.
  /// scale must be positive.
  MeasurableSet1D rescaled(double origin, double scale, Interval new_ambient) const;

 private:
  std::vector<Interval> intervals_;
  Interval ambient_{0.0, 1.0};
};

/// Lebesgue measure: sum of interval lengths.
double measure(const MeasurableSet1D& s);

struct FatCantorSpec {
  int depth = 0;
  double removal_ratio = 0.25;
};

/// Smith-Volterra-Cantor construction: stage k removes the open middle piece
/// of length ratio^(k+1) * |ambient| from each of the 2^k remaining intervals.
/// Positive measure, empty interior in the limit.
MeasurableSet1D fat_cantor(const FatCantorSpec& spec, Interval ambient = {0.0, 1.0});

/// Closed form 1 - r (1 - (2r)^d) / (1 - 2r), scaled by |ambient|.
double fat_cantor_measure(const FatCantorSpec& spec, Interval ambient = {0.0, 1.0});

/// n+1 increasing points of the closure of E with consecutive gaps at least
/// |E|/(n+1): x_0 = inf E, x_i = inf(E ∩ [x_{i-1} + |E|/(n+1), +inf)).
/// Throws InfeasibleNodes when a point cannot be placed.
std::vector<double> greedy_nodes(const MeasurableSet1D& e, int n);

struct Subinterval {
  Interval cell;
  double overlap = 0.0;  // |E ∩ cell|
  int cell_count = 0;    // number of cells scanned
};

/// Covers the ambient interval by ceil(5/(2 rho)) cells of length
/// (2 rho / 5)|ambient| (the last one right-aligned) and returns the cell with
/// the largest overlap with E. overlap >= |E| / cell_count.
Subinterval best_subinterval(const MeasurableSet1D& e, double rho);

// ---------------------------------------------------------------------------
// 2D

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Rect {
  Interval x;
  Interval y;

  double area() const { return x.length() * y.length(); }
  bool contains(Point2 p) const { return x.contains(p.x) && y.contains(p.y); }
};

/// Union of axis-aligned rectangles (overlaps allowed).
class RectSet2D {
 public:
  RectSet2D() = default;
  explicit RectSet2D(std::vector<Rect> rects);

  /// rectangle omega x [ylo, yhi] for every interval of omega
  static RectSet2D product(const MeasurableSet1D& omega, Interval y);

  const std::vector<Rect>& rects() const { return rects_; }
  bool empty() const { return rects_.empty(); }
  bool contains(Point2 p) const;
  Rect bounding_box() const;

  /// Area of the union (slab sweep).
  double area() const;

 private:
  std::vector<Rect> rects_;
};

struct RayTrace {
  double measure = 0.0;
  MeasurableSet1D trace;  // {t in [0,1] : from + t (to - from) in E}
};

/// Trace of E on the segment from -> to, parametrised by t in [0,1].
RayTrace segment_trace(const RectSet2D& e, Point2 from, Point2 to);

/// {t in [0,1] : x + t z in E} for a unit direction z.
RayTrace ray_measure(const RectSet2D& e, Point2 x, Point2 z);

}  // namespace nullctl::sets
