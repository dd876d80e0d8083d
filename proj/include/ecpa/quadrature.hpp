#pragma once

#include <cstddef>
#include <functional>

namespace ecpa {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t subdivisions = 0;
};

// Adaptive Gauss-Kronrod (7-15 point) integration of f over [a, b].
// Throws NumericalError when the interval budget is exhausted before the
// error estimate drops below abs_tol. Integrands with known breakpoints
// should be integrated piecewise by the caller.
QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, double abs_tol = 1e-10,
                     std::size_t max_subdivisions = 10000);

}  // namespace ecpa
