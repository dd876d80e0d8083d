#include "ecpa/distribution.hpp"

#include <algorithm>
#include <cmath>

#include "ecpa/errors.hpp"
#include "ecpa/quadrature.hpp"
#include "ecpa/stats.hpp"

namespace ecpa {
namespace {

constexpr double kQuadTol = 1e-10;

}  // namespace

Distribution Distribution::gaussian(double mean, double variance, double lo,
                                    double hi) {
  if (!(variance > 0.0))
    throw ArgumentError("Distribution::gaussian: variance must be > 0");
  if (!(lo < hi))
    throw ArgumentError("Distribution::gaussian: empty support");
  Distribution d;
  d.kind_ = Kind::Gaussian;
  d.mean_ = mean;
  d.sd_ = std::sqrt(variance);
  d.lo_ = lo;
  d.hi_ = hi;
  d.cdf_lo_ = normal_cdf((lo - mean) / d.sd_);
  const double cdf_hi = normal_cdf((hi - mean) / d.sd_);
  d.norm_ = cdf_hi - d.cdf_lo_;
  if (!(d.norm_ > 0.0))
    throw ArgumentError(
        "Distribution::gaussian: truncation window carries no mass");
  return d;
}

Distribution Distribution::empirical(std::vector<double> samples) {
  if (samples.empty())
    throw ArgumentError("Distribution::empirical: no samples");
  std::sort(samples.begin(), samples.end());
  Distribution d;
  d.kind_ = Kind::Empirical;
  d.lo_ = samples.front();
  d.hi_ = samples.back();
  d.xs_ = std::move(samples);
  return d;
}

Distribution Distribution::tabulated(std::vector<double> grid,
                                     std::vector<double> cdf) {
  if (grid.size() != cdf.size() || grid.size() < 2)
    throw ArgumentError("Distribution::tabulated: need matching grid/cdf of size >= 2");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1]))
      throw ArgumentError("Distribution::tabulated: grid must be increasing");
    if (cdf[i] < cdf[i - 1])
      throw ArgumentError("Distribution::tabulated: CDF must be nondecreasing");
  }
  if (std::abs(cdf.front()) > 1e-12 || std::abs(cdf.back() - 1.0) > 1e-12)
    throw ArgumentError(
        "Distribution::tabulated: CDF must be 0 at the lower bound and 1 at "
        "the upper bound");
  Distribution d;
  d.kind_ = Kind::Tabulated;
  d.lo_ = grid.front();
  d.hi_ = grid.back();
  d.xs_ = std::move(grid);
  d.ps_ = std::move(cdf);
  d.ps_.front() = 0.0;
  d.ps_.back() = 1.0;
  return d;
}

double Distribution::cdf(double x) const {
  if (x < lo_) return 0.0;
  if (x >= hi_) return 1.0;
  switch (kind_) {
    case Kind::Gaussian:
      return (normal_cdf((x - mean_) / sd_) - cdf_lo_) / norm_;
    case Kind::Empirical: {
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      return static_cast<double>(it - xs_.begin()) /
             static_cast<double>(xs_.size());
    }
    case Kind::Tabulated: {
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      const std::size_t j = static_cast<std::size_t>(it - xs_.begin());
      const double t = (x - xs_[j - 1]) / (xs_[j] - xs_[j - 1]);
      return ps_[j - 1] + t * (ps_[j] - ps_[j - 1]);
    }
  }
  return 0.0;
}

double Distribution::expect_on(const std::function<double(double)>& g,
                               double a, double b) const {
  if (kind_ == Kind::Empirical) {
    // (a, b] mass over the sample points.
    double acc = 0.0;
    for (double v : xs_)
      if (v > a && v <= b) acc += g(v);
    return acc / static_cast<double>(xs_.size());
  }
  const double lo = std::max(a, lo_);
  const double hi = std::min(b, hi_);
  if (!(lo < hi)) return 0.0;
  switch (kind_) {
    case Kind::Gaussian: {
      const double inv = 1.0 / (sd_ * std::sqrt(2.0 * M_PI) * norm_);
      auto integrand = [&](double y) {
        const double z = (y - mean_) / sd_;
        return g(y) * inv * std::exp(-0.5 * z * z);
      };
      return integrate(integrand, lo, hi, kQuadTol).value;
    }
    case Kind::Empirical:
      return 0.0;  // handled above
    case Kind::Tabulated: {
      // Piecewise-constant density on each grid segment.
      double acc = 0.0;
      for (std::size_t j = 1; j < xs_.size(); ++j) {
        const double seg_lo = std::max(lo, xs_[j - 1]);
        const double seg_hi = std::min(hi, xs_[j]);
        if (!(seg_lo < seg_hi)) continue;
        const double density =
            (ps_[j] - ps_[j - 1]) / (xs_[j] - xs_[j - 1]);
        if (density == 0.0) continue;
        acc += density * integrate(g, seg_lo, seg_hi, kQuadTol).value;
      }
      return acc;
    }
  }
  return 0.0;
}

double expected_dld_quantile(const Distribution& f, const Distribution& f_hat,
                             double x1, double x2,
                             const QuantileLossSpec& spec) {
  if (x1 == x2) return 0.0;
  const bool ordered = x1 < x2;
  const double lo = ordered ? x1 : x2;
  const double hi = ordered ? x2 : x1;
  const double sign = ordered ? 1.0 : -1.0;
  if (!(lo >= spec.support_lo && hi <= spec.support_hi))
    throw ArgumentError("expected_dld_quantile: forecasts outside the support");

  // 1{Y <= x2} - 1{Y <= x1} is sign * 1{lo < Y <= hi}.
  const double term_f = sign * f.expect_on(spec.g, lo, hi);
  const double term_fhat = sign * f_hat.expect_on(spec.g, lo, hi);
  const double boundary = spec.g(x1) * (f.cdf(x1) - f_hat.cdf(x1)) -
                          spec.g(x2) * (f.cdf(x2) - f_hat.cdf(x2));
  return term_f - term_fhat + boundary;
}

double expected_dld_twcrps(const Distribution& f, const Distribution& f_hat,
                           const Distribution& g1, const Distribution& g2,
                           const std::function<double(double)>& u) {
  const double lo = std::min(std::min(f.lower(), f_hat.lower()),
                             std::min(g1.lower(), g2.lower()));
  const double hi = std::max(std::max(f.upper(), f_hat.upper()),
                             std::max(g1.upper(), g2.upper()));
  auto integrand = [&](double z) {
    return u(z) * (g2.cdf(z) - g1.cdf(z)) * (f.cdf(z) - f_hat.cdf(z));
  };
  return 2.0 * integrate(integrand, lo, hi, kQuadTol).value;
}

}  // namespace ecpa
