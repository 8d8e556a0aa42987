#pragma once

#include <charconv>
#include <stdexcept>
#include <string>

namespace qpurify {

/// A requested enumeration or basis exceeds its configured cap.
class SizeError : public std::length_error {
 public:
  explicit SizeError(const std::string& what) : std::length_error(what) {}
};

/// A truncation, series or tail bound could not be brought under tolerance.
class ToleranceError : public std::runtime_error {
 public:
  explicit ToleranceError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical object left its physical domain (negative eigenvalues,
/// symplectic eigenvalues below one).
class NumericalHealthError : public std::runtime_error {
 public:
  explicit NumericalHealthError(const std::string& what) : std::runtime_error(what) {}
};

/// Input lies outside a tabulated regime.
class UnsupportedError : public std::logic_error {
 public:
  explicit UnsupportedError(const std::string& what) : std::logic_error(what) {}
};

/// Shortest round-trip text for a double, for messages and output files.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace qpurify
