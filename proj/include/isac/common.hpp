#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;
using RVec = std::vector<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Floor reported for dB quantities whose linear value is zero.
inline constexpr double kDbFloor = -300.0;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates the documented precondition of an operation.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A requested value lies outside what the model can reach.
class OutOfRange : public Error {
 public:
  OutOfRange(const std::string& what, double lo, double hi)
      : Error(what), lo_(lo), hi_(hi) {}
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Two resource-grid placements claim the same resource element.
class Collision : public Error {
 public:
  using Error::Error;
};

/// The Monte-Carlo workload exceeds the configured sample budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Geometry places the user outside the beam codebook sector.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// 10*log10 with the library-wide floor for non-positive inputs.
inline double to_db(double linear) {
  if (!(linear > 0.0)) return kDbFloor;
  double db = 10.0 * std::log10(linear);
  return db < kDbFloor ? kDbFloor : db;
}

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace isac
