#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "vropt/errors.hpp"

namespace vropt {

/// Flat parameter/gradient vector. All training math is 64-bit; reductions
/// accumulate in index order so repeated evaluation is bit-stable.
using ParamVector = std::vector<double>;

namespace detail {
inline void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b)
    throw StructuralError(std::string(op) + ": length mismatch (" +
                          std::to_string(a) + " vs " + std::to_string(b) + ")");
}
}  // namespace detail

inline ParamVector vec_add(std::span<const double> a, std::span<const double> b) {
  detail::require_same_length(a.size(), b.size(), "vec_add");
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline ParamVector vec_sub(std::span<const double> a, std::span<const double> b) {
  detail::require_same_length(a.size(), b.size(), "vec_sub");
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline ParamVector vec_scale(std::span<const double> a, double c) {
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return out;
}

inline ParamVector vec_hadamard(std::span<const double> a,
                                std::span<const double> b) {
  detail::require_same_length(a.size(), b.size(), "vec_hadamard");
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline double vec_dot(std::span<const double> a, std::span<const double> b) {
  detail::require_same_length(a.size(), b.size(), "vec_dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double vec_l2norm(std::span<const double> a) {
  return std::sqrt(vec_dot(a, a));
}

inline bool vec_all_finite(std::span<const double> a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace vropt
