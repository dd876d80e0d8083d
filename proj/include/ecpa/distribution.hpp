#pragma once

#include <functional>
#include <vector>

#include "ecpa/loss.hpp"

namespace ecpa {

// Univariate distribution used by the difference-of-loss-differences
// computations: truncated Gaussian, empirical sample, or a tabulated CDF
// interpolated linearly between grid points.
class Distribution {
 public:
  enum class Kind { Gaussian, Empirical, Tabulated };

  static Distribution gaussian(double mean, double variance, double lo,
                               double hi);
  static Distribution empirical(std::vector<double> samples);
  static Distribution tabulated(std::vector<double> grid,
                                std::vector<double> cdf);

  Kind kind() const noexcept { return kind_; }
  double lower() const noexcept { return lo_; }
  double upper() const noexcept { return hi_; }

  double cdf(double x) const;

  // E[g(Y) 1{a < Y <= b}].
  double expect_on(const std::function<double(double)>& g, double a,
                   double b) const;

 private:
  Distribution() = default;

  Kind kind_ = Kind::Gaussian;
  double lo_ = 0.0, hi_ = 0.0;
  // Gaussian parameters.
  double mean_ = 0.0, sd_ = 1.0, norm_ = 1.0, cdf_lo_ = 0.0;
  // Empirical samples (sorted) or tabulated grid/cdf.
  std::vector<double> xs_;
  std::vector<double> ps_;
};

// Expected difference of loss differences for the quantile loss: how much
// the mean loss difference moves when evaluation switches from targets
// drawn from f to proxies drawn from f_hat.
double expected_dld_quantile(const Distribution& f, const Distribution& f_hat,
                             double x1, double x2,
                             const QuantileLossSpec& spec);

// Expected DLD for the threshold-weighted CRPS with CDF-valued forecasts
// g1, g2 and nonnegative weight u:
//   2 * integral of u(z) [g2(z) - g1(z)] [f(z) - f_hat(z)] dz.
double expected_dld_twcrps(const Distribution& f, const Distribution& f_hat,
                           const Distribution& g1, const Distribution& g2,
                           const std::function<double(double)>& u);

}  // namespace ecpa
