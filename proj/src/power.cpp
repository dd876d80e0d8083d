#include "ecpa/power.hpp"

#include <cmath>
#include <sstream>

#include "ecpa/errors.hpp"

namespace ecpa {

Snr Snr::finite(double value) {
  if (!(value > 0.0) || std::isinf(value))
    throw ArgumentError("SNR must be positive and finite (or Snr::infinity())");
  return Snr(false, value);
}

double Snr::value() const {
  if (infinite_) throw ArgumentError("infinite SNR has no finite value");
  return value_;
}

void SimParams::validate() const {
  if (!(std::abs(ar_coeff) < 1.0))
    throw ArgumentError("|ar_coeff| must be < 1 for a stationary target");
  if (!(sigma_eps2 > 0.0))
    throw ArgumentError("innovation variance must be > 0");
  if (!(sigma_hat2 >= 0.0))
    throw ArgumentError("proxy-noise variance must be >= 0");
  if (n < 1) throw ArgumentError("sample size must be >= 1");
  if (!std::isfinite(mu) || !std::isfinite(xi))
    throw ArgumentError("mu and xi must be finite");
}

double stationary_variance(const SimParams& p) {
  p.validate();
  return p.sigma_eps2 / (1.0 - p.ar_coeff * p.ar_coeff);
}

double snr_to_sigma_hat2(const Snr& zeta, const SimParams& p) {
  if (zeta.is_infinite()) return 0.0;
  return stationary_variance(p) / zeta.value();
}

ClosedFormOmega omega_closed_form(const SimParams& p) {
  p.validate();
  const double one_minus = 1.0 - p.ar_coeff;
  const double mu2f2 = p.mu * p.mu * one_minus * one_minus;
  const double scale =
      2.0 * mu2f2 * mu2f2 + 8.0 * mu2f2 * (p.sigma_eps2 + p.sigma_hat2);

  ClosedFormOmega out;
  out.scale = scale;
  out.degenerate = scale == 0.0;
  out.omega = CovMatrix(2);
  out.omega(0, 0) = scale;
  out.omega(0, 1) = out.omega(1, 0) = scale * p.mu;
  out.omega(1, 1) =
      scale * (stationary_variance(p) + p.mu * p.mu + p.sigma_hat2);
  return out;
}

std::array<double, 2> delta_local(LossKind kind, const SimParams& p) {
  p.validate();
  const double factor =
      kind == LossKind::AbsoluteError ? std::sqrt(2.0 / M_PI) : 1.0;
  return {factor * p.xi, factor * p.mu * p.xi};
}

double expected_se_loss_diff(const SimParams& p, double sigma1_sq) {
  p.validate();
  if (sigma1_sq < 0.0)
    throw ArgumentError("forecast-noise variance must be >= 0");
  const double one_minus = 1.0 - p.ar_coeff;
  return sigma1_sq - p.mu * p.mu * one_minus * one_minus;
}

double expected_ae_loss_diff(const SimParams& p, double sigma1_sq,
                             bool use_proxy) {
  p.validate();
  if (sigma1_sq < 0.0)
    throw ArgumentError("forecast-noise variance must be >= 0");
  const double base = p.sigma_eps2 + (use_proxy ? p.sigma_hat2 : 0.0);
  const double m = p.mu * (1.0 - p.ar_coeff);
  return folded_normal_mean(0.0, std::sqrt(base + sigma1_sq)) -
         folded_normal_mean(m, std::sqrt(base));
}

double ae_null_sigma1(const SimParams& p) {
  p.validate();
  auto f = [&](double s) { return expected_ae_loss_diff(p, s, false); };

  double lo = 0.0, hi = 100.0;
  const double f_lo = f(lo);
  if (f_lo == 0.0) return 0.0;
  if (f_lo > 0.0 || f(hi) < 0.0)
    throw NumericalError(
        "ae_null_sigma1: no sign change on [0, 100]; cannot bracket the root");
  // f is increasing in sigma1_sq, so plain bisection converges.
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double null_sigma1_sq(LossKind kind, const SimParams& p) {
  if (kind == LossKind::SquaredError) {
    const double one_minus = 1.0 - p.ar_coeff;
    return p.mu * p.mu * one_minus * one_minus;
  }
  return ae_null_sigma1(p);
}

PowerResult asymptotic_local_power(std::span<const double> delta,
                                   const CovMatrix& omega, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw ArgumentError("significance level must lie in (0, 1)");
  if (delta.size() != omega.dim())
    throw ArgumentError("delta and omega dimensions do not match");

  PowerResult out;
  out.delta.assign(delta.begin(), delta.end());
  out.omega = omega;
  out.tau = tau;
  out.noncentrality = quad_form_inv(omega, delta);
  if (out.noncentrality == 0.0) {
    out.alp = tau;  // central case: rejection probability is the size
    return out;
  }
  const unsigned q = static_cast<unsigned>(delta.size());
  const double critical = chi2_quantile(q, 1.0 - tau);
  out.alp = noncentral_chi2_sf(q, out.noncentrality, critical);
  return out;
}

}  // namespace ecpa
