#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace convbound {

/// Word and event counts. Real networks exceed 2^32 MACs, so everything is 64-bit
/// and every product on a counting path goes through the checked helpers below.
using Count = std::int64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

inline Count checked_mul(Count a, Count b) {
  Count out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw OverflowError("count overflow in multiplication");
  }
  return out;
}

template <typename... Rest>
Count checked_mul(Count a, Count b, Rest... rest) {
  return checked_mul(checked_mul(a, b), rest...);
}

inline Count checked_add(Count a, Count b) {
  Count out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw OverflowError("count overflow in addition");
  }
  return out;
}

constexpr Count ceil_div(Count a, Count b) { return (a + b - 1) / b; }

}  // namespace convbound
