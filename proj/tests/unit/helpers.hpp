#pragma once

#include <doctest.h>

#include "rrdo/linalg.hpp"
#include "rrdo/error.hpp"
#include "rrdo/rng.hpp"

namespace testing {

using rrdo::Complex;
using rrdo::ComplexMatrix;
using rrdo::ComplexVector;

inline ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline ComplexMatrix stochastic2(double a, double b) { return mat2(1 - a, a, b, 1 - b); }

inline ComplexVector vec(std::initializer_list<Complex> xs) {
  ComplexVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (auto x : xs) v(i++) = x;
  return v;
}

inline ComplexMatrix random_matrix(rrdo::RngStream& rng, Eigen::Index d, double scale = 1.0) {
  ComplexMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = scale * Complex(rng.normal(), rng.normal());
  return m;
}

template <typename Fn>
rrdo::ErrorKind error_kind(Fn fn) {
  try {
    fn();
  } catch (const rrdo::Error& e) {
    return e.kind();
  }
  FAIL("expected an rrdo::Error");
  return rrdo::ErrorKind::kUsage;
}

}  // namespace testing
