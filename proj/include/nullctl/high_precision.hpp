#pragma once

// Extended-precision scalar for Gram matrices and moment solves. Observability
// Grams of a few dozen modes have smallest eigenvalues near 1e-56, so double
// precision cannot resolve them.

#include <boost/multiprecision/mpfr.hpp>
#include <Eigen/Dense>

#include <limits>

namespace nullctl {

inline constexpr unsigned kHighPrecisionDigits = 200;

using HighReal =
    boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<kHighPrecisionDigits>,
                                  boost::multiprecision::et_off>;

using HighMatrix = Eigen::Matrix<HighReal, Eigen::Dynamic, Eigen::Dynamic>;
using HighVector = Eigen::Matrix<HighReal, Eigen::Dynamic, 1>;

inline HighReal high_pi() { return boost::math::constants::pi<HighReal>(); }

inline double to_double(const HighReal& x) { return x.convert_to<double>(); }

}  // namespace nullctl

namespace Eigen {

template <>
struct NumTraits<nullctl::HighReal> : GenericNumTraits<nullctl::HighReal> {
  using Real = nullctl::HighReal;
  using NonInteger = nullctl::HighReal;
  using Nested = nullctl::HighReal;
  using Literal = nullctl::HighReal;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    ReadCost = 10,
    AddCost = 10,
    MulCost = 40,
    IsSigned = 1,
    RequireInitialization = 1
  };
  static Real epsilon() { return std::numeric_limits<Real>::epsilon(); }
  static Real dummy_precision() { return 1000 * epsilon(); }
  static Real highest() { return (std::numeric_limits<Real>::max)(); }
  static Real lowest() { return (std::numeric_limits<Real>::lowest)(); }
  static int digits10() { return std::numeric_limits<Real>::digits10; }
  static Real infinity() { return std::numeric_limits<Real>::infinity(); }
  static Real quiet_NaN() { return std::numeric_limits<Real>::quiet_NaN(); }
};

}  // namespace Eigen
