#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace bladeopt {

inline constexpr double kPi = 3.14159265358979323846;

/// Input or configuration problem; maps to CLI exit code 1.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure (singular system, divergence); maps to CLI exit code 2.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File parse failure carrying a 1-based line number.
struct ParseError : ValidationError {
  ParseError(const std::string& msg, int line)
      : ValidationError(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
  int line_number;
};

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Reduce a fiber angle to the canonical domain [0, pi).
inline double wrap_angle(double rad) {
  double a = std::fmod(rad, kPi);
  if (a < 0.0) a += kPi;
  return a;
}

}  // namespace bladeopt
