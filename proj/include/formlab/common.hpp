#pragma once

#include <charconv>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace formlab {

using cplx = std::complex<double>;

/// Malformed or out-of-contract input. Maps to CLI exit code 2.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Expression evaluation failure (zero denominator, singular power).
class EvalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A non-finite value showed up where a finite one was required. Exit code 3.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pairwise summation with a fixed split point, so the result depends only
/// on the input order and never on how the terms were produced.
template <typename T>
T pairwise_sum(std::span<const T> terms) {
  if (terms.empty()) return T{};
  if (terms.size() <= 8) {
    T acc{};
    for (const auto& t : terms) acc += t;
    return acc;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

template <typename T>
T pairwise_sum(const std::vector<T>& terms) {
  return pairwise_sum(std::span<const T>(terms));
}

/// Shortest decimal text that parses back to exactly x.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace formlab
