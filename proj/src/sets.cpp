#include "nullctl/sets.hpp"

#include "nullctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nullctl::sets {

namespace {

std::string describe(const Interval& i) {
  std::ostringstream os;
  os << '[' << i.lo << ", " << i.hi << ']';
  return os.str();
}

}  // namespace

MeasurableSet1D::MeasurableSet1D(std::vector<Interval> intervals, Interval ambient)
    : intervals_(std::move(intervals)), ambient_(ambient) {
  if (!(ambient_.lo <= ambient_.hi)) {
    throw ValidationError("ambient interval " + describe(ambient_) + " is reversed");
  }
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const Interval& cur = intervals_[i];
    if (!std::isfinite(cur.lo) || !std::isfinite(cur.hi) || cur.lo > cur.hi) {
      throw ValidationError("interval " + describe(cur) + " is reversed or not finite");
    }
    if (!ambient_.contains(cur)) {
      throw ValidationError("interval " + describe(cur) + " leaves ambient " + describe(ambient_));
    }
    if (i > 0 && !(intervals_[i - 1].hi < cur.lo)) {
      throw ValidationError("intervals " + describe(intervals_[i - 1]) + " and " + describe(cur) +
                            " are unsorted or not disjoint");
    }
  }
}

MeasurableSet1D MeasurableSet1D::from_unsorted(std::vector<Interval> intervals, Interval ambient) {
  std::vector<Interval> clipped;
  clipped.reserve(intervals.size());
  for (const Interval& i : intervals) {
    if (!(i.lo <= i.hi)) throw ValidationError("interval " + describe(i) + " is reversed");
    Interval c{std::max(i.lo, ambient.lo), std::min(i.hi, ambient.hi)};
    if (c.lo <= c.hi) clipped.push_back(c);
  }
  std::sort(clipped.begin(), clipped.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const Interval& i : clipped) {
    if (!merged.empty() && i.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, i.hi);
    } else {
      merged.push_back(i);
    }
  }
  return MeasurableSet1D(std::move(merged), ambient);
}

double MeasurableSet1D::inf() const {
  if (empty()) throw ValidationError("inf of an empty set");
  return intervals_.front().lo;
}

double MeasurableSet1D::sup() const {
  if (empty()) throw ValidationError("sup of an empty set");
  return intervals_.back().hi;
}

bool MeasurableSet1D::contains(double x) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](double v, const Interval& i) { return v < i.lo; });
  if (it == intervals_.begin()) return false;
  return std::prev(it)->contains(x);
}

bool MeasurableSet1D::subset_of(const MeasurableSet1D& other) const {
  for (const Interval& i : intervals_) {
    bool covered = std::any_of(other.intervals_.begin(), other.intervals_.end(),
                               [&](const Interval& o) { return o.contains(i); });
    if (!covered) return false;
  }
  return true;
}

MeasurableSet1D MeasurableSet1D::intersect(const Interval& window) const {
  std::vector<Interval> out;
  for (const Interval& i : intervals_) {
    Interval c{std::max(i.lo, window.lo), std::min(i.hi, window.hi)};
    if (c.lo <= c.hi) out.push_back(c);
  }
  MeasurableSet1D s;
  s.intervals_ = std::move(out);
  s.ambient_ = ambient_;
  return s;
}

MeasurableSet1D MeasurableSet1D::rescaled(double origin, double scale, Interval new_ambient) const {
  if (!(scale > 0.0)) throw ValidationError("rescale factor must be positive");
  std::vector<Interval> out;
  out.reserve(intervals_.size());
  for (const Interval& i : intervals_) {
    out.push_back({(i.lo - origin) * scale, (i.hi - origin) * scale});
  }
  // rounding may push endpoints a few ulps outside the new ambient
  return from_unsorted(std::move(out), new_ambient);
}

double measure(const MeasurableSet1D& s) {
  double total = 0.0;
  for (const Interval& i : s.intervals()) total += i.length();
  return total;
}

// ---------------------------------------------------------------------------

MeasurableSet1D fat_cantor(const FatCantorSpec& spec, Interval ambient) {
  if (spec.depth < 0) throw ValidationError("fat Cantor depth must be >= 0");
  if (!(spec.removal_ratio > 0.0 && spec.removal_ratio < 1.0 / 3.0)) {
    throw ValidationError("fat Cantor removal ratio must lie in (0, 1/3)");
  }
  std::vector<Interval> pieces{ambient};
  double removed = ambient.length();
  for (int k = 0; k < spec.depth; ++k) {
    removed *= spec.removal_ratio;
    std::vector<Interval> next;
    next.reserve(2 * pieces.size());
    for (const Interval& p : pieces) {
      double mid = p.midpoint();
      next.push_back({p.lo, mid - 0.5 * removed});
      next.push_back({mid + 0.5 * removed, p.hi});
    }
    pieces = std::move(next);
  }
  return MeasurableSet1D(std::move(pieces), ambient);
}

double fat_cantor_measure(const FatCantorSpec& spec, Interval ambient) {
  const double r = spec.removal_ratio;
  const double removed = r * (1.0 - std::pow(2.0 * r, spec.depth)) / (1.0 - 2.0 * r);
  return (1.0 - removed) * ambient.length();
}

// ---------------------------------------------------------------------------

std::vector<double> greedy_nodes(const MeasurableSet1D& e, int n) {
  if (n < 0) throw ValidationError("greedy_nodes needs n >= 0");
  const double total = measure(e);
  if (!(total > 0.0)) throw ValidationError("greedy_nodes needs a set of positive measure");
  const double gap = total / (n + 1);
  std::vector<double> nodes;
  nodes.reserve(n + 1);
  nodes.push_back(e.inf());
  const auto& parts = e.intervals();
  std::size_t cursor = 0;
  for (int i = 1; i <= n; ++i) {
    const double target = nodes.back() + gap;
    while (cursor < parts.size() && parts[cursor].hi < target) ++cursor;
    if (cursor == parts.size()) {
      std::ostringstream os;
      os << "cannot place node " << i << " of " << n << " at gap " << gap;
      throw InfeasibleNodes(os.str());
    }
    nodes.push_back(std::max(parts[cursor].lo, target));
  }
  return nodes;
}

Subinterval best_subinterval(const MeasurableSet1D& e, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ValidationError("best_subinterval needs 0 < rho <= 1");
  if (!(measure(e) > 0.0)) throw ValidationError("best_subinterval needs |E| > 0");
  const Interval amb = e.ambient();
  const double cell_length = 0.4 * rho * amb.length();
  // 5/(2 rho) is an integer for the usual rho; absorb its rounding noise
  const int count = static_cast<int>(std::ceil(2.5 / rho - 1e-9));
  Subinterval best;
  best.cell_count = count;
  best.overlap = -1.0;
  for (int i = 0; i < count; ++i) {
    double lo = amb.lo + i * cell_length;
    Interval cell = (i + 1 == count) ? Interval{amb.hi - cell_length, amb.hi}
                                     : Interval{lo, lo + cell_length};
    double overlap = measure(e.intersect(cell));
    if (overlap > best.overlap) {
      best.overlap = overlap;
      best.cell = cell;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

RectSet2D::RectSet2D(std::vector<Rect> rects) : rects_(std::move(rects)) {
  for (const Rect& r : rects_) {
    if (!(r.x.lo <= r.x.hi) || !(r.y.lo <= r.y.hi)) {
      throw ValidationError("rectangle with reversed sides");
    }
  }
}

RectSet2D RectSet2D::product(const MeasurableSet1D& omega, Interval y) {
  std::vector<Rect> rects;
  for (const Interval& i : omega.intervals()) rects.push_back({i, y});
  return RectSet2D(std::move(rects));
}

bool RectSet2D::contains(Point2 p) const {
  return std::any_of(rects_.begin(), rects_.end(), [&](const Rect& r) { return r.contains(p); });
}

Rect RectSet2D::bounding_box() const {
  if (rects_.empty()) throw ValidationError("bounding box of an empty set");
  Rect box = rects_.front();
  for (const Rect& r : rects_) {
    box.x.lo = std::min(box.x.lo, r.x.lo);
    box.x.hi = std::max(box.x.hi, r.x.hi);
    box.y.lo = std::min(box.y.lo, r.y.lo);
    box.y.hi = std::max(box.y.hi, r.y.hi);
  }
  return box;
}

double RectSet2D::area() const {
  std::vector<double> xs;
  for (const Rect& r : rects_) {
    xs.push_back(r.x.lo);
    xs.push_back(r.x.hi);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double total = 0.0;
  std::vector<Interval> column;
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    const double a = xs[s];
    const double b = xs[s + 1];
    column.clear();
    for (const Rect& r : rects_) {
      if (r.x.lo <= a && b <= r.x.hi) column.push_back(r.y);
    }
    if (column.empty()) continue;
    std::sort(column.begin(), column.end(),
              [](const Interval& p, const Interval& q) { return p.lo < q.lo; });
    double covered = 0.0;
    Interval run = column.front();
    for (std::size_t i = 1; i < column.size(); ++i) {
      if (column[i].lo <= run.hi) {
        run.hi = std::max(run.hi, column[i].hi);
      } else {
        covered += run.length();
        run = column[i];
      }
    }
    covered += run.length();
    total += covered * (b - a);
  }
  return total;
}

RayTrace segment_trace(const RectSet2D& e, Point2 from, Point2 to) {
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  std::vector<Interval> pieces;
  auto clip = [](double start, double delta, const Interval& side, double& t0, double& t1) {
    if (delta == 0.0) return side.contains(start);
    double a = (side.lo - start) / delta;
    double b = (side.hi - start) / delta;
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    return t0 <= t1;
  };
  for (const Rect& r : e.rects()) {
    double t0 = 0.0;
    double t1 = 1.0;
    if (clip(from.x, dx, r.x, t0, t1) && clip(from.y, dy, r.y, t0, t1) && t0 <= t1) {
      pieces.push_back({t0, t1});
    }
  }
  RayTrace out;
  out.trace = MeasurableSet1D::from_unsorted(std::move(pieces), {0.0, 1.0});
  out.measure = measure(out.trace);
  return out;
}

RayTrace ray_measure(const RectSet2D& e, Point2 x, Point2 z) {
  const double norm = std::hypot(z.x, z.y);
  if (std::abs(norm - 1.0) > 1e-12) throw ValidationError("ray direction must be a unit vector");
  return segment_trace(e, x, {x.x + z.x, x.y + z.y});
}

}  // namespace nullctl::sets
