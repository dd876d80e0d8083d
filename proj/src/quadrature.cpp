#include "ecpa/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "ecpa/errors.hpp"

namespace ecpa {
namespace {

// 15-point Kronrod nodes/weights on [-1, 1] and the embedded 7-point Gauss
// weights (abscissae 1, 3, ... of the Kronrod set).
constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};

constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};

constexpr double kGaussWeights[4] = {0.129484966168870, 0.279705391489277,
                                     0.381830050505119, 0.417959183673469};

struct Segment {
  double a, b;
  double value;
  double error;
};

struct SegmentOrder {
  bool operator()(const Segment& x, const Segment& y) const {
    return x.error < y.error;
  }
};

Segment evaluate(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(center - half * kKronrodNodes[i]);
    fv[14 - i] = f(center + half * kKronrodNodes[i]);
  }
  fv[7] = f(center);

  double kronrod = kKronrodWeights[7] * fv[7];
  double gauss = kGaussWeights[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    kronrod += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (fv[i] + fv[14 - i]);
  }
  kronrod *= half;
  gauss *= half;

  double err = std::abs(kronrod - gauss);
  // Scaled error heuristic from QUADPACK: (200*err)^1.5 relative to the
  // integral of |f|, which sharpens the raw Gauss/Kronrod difference.
  double resabs = 0.0;
  for (int i = 0; i < 7; ++i)
    resabs += kKronrodWeights[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
  resabs += kKronrodWeights[7] * std::abs(fv[7]);
  resabs *= std::abs(half);
  if (resabs > 0.0 && err > 0.0) {
    const double scaled = std::pow(200.0 * err / resabs, 1.5);
    err = resabs * std::min(1.0, scaled);
  }
  return Segment{a, b, kronrod, err};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, double abs_tol, std::size_t max_subdivisions) {
  if (!(a <= b)) return integrate([&f](double x) { return -f(x); }, b, a,
                                  abs_tol, max_subdivisions);
  if (a == b) return QuadResult{0.0, 0.0, 0};

  std::priority_queue<Segment, std::vector<Segment>, SegmentOrder> segments;
  segments.push(evaluate(f, a, b));
  double total = segments.top().value;
  double total_err = segments.top().error;
  std::size_t splits = 0;

  while (total_err > abs_tol) {
    if (splits >= max_subdivisions) {
      std::ostringstream msg;
      msg << "quadrature did not converge on [" << a << ", " << b
          << "]: error " << total_err << " > tol " << abs_tol << " after "
          << splits << " subdivisions";
      throw NumericalError(msg.str());
    }
    Segment worst = segments.top();
    segments.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval at floating-point resolution; accept its estimate.
      total_err -= worst.error;
      segments.push(Segment{worst.a, worst.b, worst.value, 0.0});
      continue;
    }
    Segment left = evaluate(f, worst.a, mid);
    Segment right = evaluate(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    segments.push(left);
    segments.push(right);
    ++splits;
  }
  return QuadResult{total, total_err, splits};
}

}  // namespace ecpa
