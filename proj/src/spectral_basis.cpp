#include "nullctl/spectral_basis.hpp"

#include "nullctl/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace nullctl::spectral {

namespace {

constexpr double kPartitionTol = 1e-14;
constexpr double kRootTol = 1e-12;
constexpr int kRescans = 3;

const ModePiece& piece_at(const std::vector<ModePiece>& pieces, double x) {
  auto it = std::upper_bound(pieces.begin(), pieces.end(), x,
                             [](double v, const ModePiece& p) { return v < p.hi; });
  if (it == pieces.end()) return pieces.back();
  return *it;
}

// (value, slope) at x = 1 from (0, 1) at x = 0; pieces receive the
// unnormalised coefficients when requested
double shoot(const DensitySpec& rho, double omega, std::vector<ModePiece>* pieces) {
  double v = 0.0;
  double s = 1.0;
  for (const DensityPiece& p : rho.pieces) {
    const double k = omega * std::sqrt(p.value);
    const double len = p.span.length();
    if (pieces) pieces->push_back({p.span.lo, p.span.hi, k, v, s / k});
    const double c = std::cos(k * len);
    const double sn = std::sin(k * len);
    const double nv = v * c + s * sn / k;
    const double ns = -v * k * sn + s * c;
    v = nv;
    s = ns;
  }
  return v;
}

// int_0^L (a cos kt + b sin kt)^2 dt
double piece_square_integral(const ModePiece& p) {
  const double L = p.hi - p.lo;
  const double k = p.k;
  const double s2 = std::sin(2.0 * k * L) / (4.0 * k);
  const double sk = std::sin(k * L);
  return p.a * p.a * (0.5 * L + s2) + p.b * p.b * (0.5 * L - s2) + p.a * p.b * sk * sk / k;
}

double quadrature_inner(const EigenPair& x, const EigenPair& y, const DensitySpec& rho) {
  using boost::math::quadrature::gauss;
  double total = 0.0;
  for (std::size_t i = 0; i < rho.pieces.size(); ++i) {
    const DensityPiece& p = rho.pieces[i];
    const double kmax = std::max(x.pieces[i].k, y.pieces[i].k);
    const int chunks = 1 + static_cast<int>(std::ceil(kmax * p.span.length() / 2.0));
    const double h = p.span.length() / chunks;
    for (int c = 0; c < chunks; ++c) {
      const double lo = p.span.lo + c * h;
      const double hi = (c + 1 == chunks) ? p.span.hi : lo + h;
      total += p.value * gauss<double, 30>::integrate([&](double t) { return x(t) * y(t); }, lo, hi);
    }
  }
  return total;
}

EigenPair make_pair(const DensitySpec& rho, double omega) {
  EigenPair e;
  e.omega = omega;
  shoot(rho, omega, &e.pieces);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < e.pieces.size(); ++i) {
    norm2 += rho.pieces[i].value * piece_square_integral(e.pieces[i]);
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (ModePiece& p : e.pieces) {
    p.a *= scale;
    p.b *= scale;
  }
  e.norm_check = quadrature_inner(e, e, rho);
  return e;
}

double bisect(const DensitySpec& rho, double lo, double hi, double flo) {
  while (hi - lo > kRootTol * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    const double fm = shoot(rho, mid, nullptr);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> scan_roots(const DensitySpec& rho, int J, double step) {
  std::vector<double> roots;
  double lo = step;
  double flo = shoot(rho, lo, nullptr);
  const double limit = 1e6 * (J + 1);
  while (static_cast<int>(roots.size()) < J) {
    const double hi = lo + step;
    if (hi > limit) throw NumericalError("sturm_liouville_basis: root scan ran away");
    const double fhi = shoot(rho, hi, nullptr);
    if (flo == 0.0) {
      roots.push_back(lo);
    } else if ((flo < 0.0) != (fhi < 0.0) && fhi != 0.0) {
      roots.push_back(bisect(rho, lo, hi, flo));
    }
    lo = hi;
    flo = fhi;
  }
  return roots;
}

}  // namespace

// ---------------------------------------------------------------------------

DensitySpec DensitySpec::constant(double value) {
  DensitySpec d;
  d.kind = Kind::constant;
  d.pieces = {{{0.0, 1.0}, value}};
  d.delta = std::min(value, 1.0 / value);
  d.validate();
  return d;
}

DensitySpec DensitySpec::piecewise(std::vector<DensityPiece> pieces, double delta) {
  DensitySpec d;
  d.kind = Kind::piecewise_constant;
  d.pieces = std::move(pieces);
  if (delta <= 0.0) {
    delta = 1.0;
    for (const DensityPiece& p : d.pieces) delta = std::min({delta, p.value, 1.0 / p.value});
  }
  d.delta = delta;
  d.validate();
  return d;
}

void DensitySpec::validate() const {
  if (pieces.empty()) throw ValidationError("density needs at least one piece");
  if (pieces.size() > static_cast<std::size_t>(kMaxDensityPieces)) {
    throw ValidationError("density has more than 64 pieces");
  }
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("density delta must lie in (0,1]");
  if (std::abs(pieces.front().span.lo) > kPartitionTol ||
      std::abs(pieces.back().span.hi - 1.0) > kPartitionTol) {
    throw ValidationError("density pieces must cover [0,1]");
  }
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const DensityPiece& p = pieces[i];
    if (!(p.span.length() > 0.0)) throw ValidationError("density piece of zero length");
    if (i > 0 && std::abs(pieces[i - 1].span.hi - p.span.lo) > kPartitionTol) {
      throw ValidationError("density pieces must be contiguous and sorted");
    }
    if (!(p.value >= delta * (1.0 - 1e-15) && p.value <= (1.0 / delta) * (1.0 + 1e-15))) {
      std::ostringstream os;
      os << "density value " << p.value << " outside [" << delta << ", " << 1.0 / delta << "]";
      throw ValidationError(os.str());
    }
  }
}

double DensitySpec::operator()(double x) const {
  for (const DensityPiece& p : pieces) {
    if (x < p.span.hi) return p.value;
  }
  return pieces.back().value;
}

double DensitySpec::max_value() const {
  double m = 0.0;
  for (const DensityPiece& p : pieces) m = std::max(m, p.value);
  return m;
}

double EigenPair::operator()(double x) const {
  const ModePiece& p = piece_at(pieces, x);
  const double t = p.k * (x - p.lo);
  return p.a * std::cos(t) + p.b * std::sin(t);
}

double EigenPair::derivative(double x) const {
  const ModePiece& p = piece_at(pieces, x);
  const double t = p.k * (x - p.lo);
  return p.k * (-p.a * std::sin(t) + p.b * std::cos(t));
}

int EigenPair::interior_zeros() const {
  // a cos t + b sin t = C sin(t + p0) with p0 = atan2(a, b); zeros at phase m pi
  int zeros = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const ModePiece& p = pieces[i];
    const double p0 = std::atan2(p.a, p.b);
    const double p1 = p0 + p.k * (p.hi - p.lo);
    const bool last = i + 1 == pieces.size();
    const double end = last ? p1 - 1e-9 : p1;
    const double start = i == 0 ? p0 + 1e-9 : p0;
    zeros += static_cast<int>(std::floor(end / std::numbers::pi) - std::floor(start / std::numbers::pi));
  }
  return zeros;
}

Basis sine_basis(int J) {
  if (J < 1) throw ValidationError("sine_basis needs J >= 1");
  Basis basis;
  basis.density = DensitySpec::constant(1.0);
  basis.pairs.reserve(J);
  for (int j = 1; j <= J; ++j) {
    EigenPair e;
    e.omega = j * std::numbers::pi;
    e.pieces = {{0.0, 1.0, e.omega, 0.0, std::numbers::sqrt2}};
    e.norm_check = 1.0;
    basis.pairs.push_back(std::move(e));
  }
  return basis;
}

double secular_function(const DensitySpec& rho, double omega) {
  if (!(omega > 0.0)) throw ValidationError("secular_function needs omega > 0");
  return shoot(rho, omega, nullptr);
}

Basis sturm_liouville_basis(const DensitySpec& rho, int J) {
  rho.validate();
  if (J < 1) throw ValidationError("sturm_liouville_basis needs J >= 1");
  double step = std::numbers::pi * rho.delta / 4.0;
  for (int attempt = 0; attempt <= kRescans; ++attempt, step *= 0.5) {
    const auto roots = scan_roots(rho, J, step);
    Basis basis;
    basis.density = rho;
    bool consistent = true;
    for (int j = 0; j < J && consistent; ++j) {
      EigenPair e = make_pair(rho, roots[j]);
      consistent = e.interior_zeros() == j;
      basis.pairs.push_back(std::move(e));
    }
    if (consistent) return basis;
  }
  throw NumericalError("sturm_liouville_basis: oscillation count mismatch after rescans");
}

int count_below(const Basis& basis, double mu) {
  if (!(mu >= 0.0)) throw ValidationError("count_below needs mu >= 0");
  if (basis.pairs.empty() || mu > basis.pairs.back().omega) {
    std::ostringstream os;
    os << "count_below: mu = " << mu << " exceeds the computed spectrum";
    throw SpectrumRangeError(os.str());
  }
  const auto it = std::upper_bound(basis.pairs.begin(), basis.pairs.end(), mu,
                                   [](double v, const EigenPair& e) { return v < e.omega; });
  return static_cast<int>(it - basis.pairs.begin());
}

double weighted_inner(const Basis& basis, std::size_t j, std::size_t k) {
  if (j >= basis.size() || k >= basis.size()) throw ValidationError("weighted_inner: index out of range");
  return quadrature_inner(basis.pairs[j], basis.pairs[k], basis.density);
}

}  // namespace nullctl::spectral
