#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "ecpa/stats.hpp"

namespace ecpa {

// Signal-to-noise ratio of the proxy; infinity is a first-class value
// meaning "no measurement noise", not a float sentinel.
class Snr {
 public:
  static Snr infinity() { return Snr(true, 0.0); }
  static Snr finite(double value);

  bool is_infinite() const noexcept { return infinite_; }
  double value() const;

  friend bool operator==(const Snr& a, const Snr& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  Snr(bool inf, double v) : infinite_(inf), value_(v) {}
  bool infinite_;
  double value_;
};

enum class LossKind { SquaredError, AbsoluteError };

// Parameters of the AR(1)-plus-noise design: target level mu, AR
// coefficient, innovation variance, proxy-noise variance, sample size and
// local-alternative scale.
struct SimParams {
  double mu = 1.0;
  double ar_coeff = 0.2;
  double sigma_eps2 = 1.0;
  double sigma_hat2 = 0.0;
  std::size_t n = 500;
  double xi = 0.0;

  void validate() const;
};

// Var(Y_t) = sigma_eps2 / (1 - ar_coeff^2).
double stationary_variance(const SimParams& p);

// Proxy-noise variance implied by an SNR target: Var(Y_t) / zeta.
double snr_to_sigma_hat2(const Snr& zeta, const SimParams& p);

// Closed-form moment covariance for instruments (1, proxy_{t-1}) under the
// squared-error design:
//   scale * [[1, mu], [mu, Var(Y) + mu^2 + sigma_hat2]],
//   scale  = 2 mu^4 (1-ar)^4 + 8 mu^2 (1-ar)^2 (sigma_eps2 + sigma_hat2).
struct ClosedFormOmega {
  CovMatrix omega;
  double scale = 0.0;
  bool degenerate = false;  // scale == 0 (mu == 0)
};
ClosedFormOmega omega_closed_form(const SimParams& p);

// Local-alternative direction: (xi, mu*xi) for squared error and
// sqrt(2/pi) * (xi, mu*xi) for absolute error.
std::array<double, 2> delta_local(LossKind kind, const SimParams& p);

// E[d] = sigma1_sq - mu^2 (1 - ar)^2 under squared error.
double expected_se_loss_diff(const SimParams& p, double sigma1_sq);

// E[d] under absolute error via folded-normal means; `use_proxy` adds the
// proxy-noise variance to both folded arguments.
double expected_ae_loss_diff(const SimParams& p, double sigma1_sq,
                             bool use_proxy);

// Root sigma1_sq of expected_ae_loss_diff(p, ., false) = 0 by bisection.
double ae_null_sigma1(const SimParams& p);

// Forecast-noise variance that makes the design a null for the given loss;
// the local alternative adds xi/sqrt(n) on top.
double null_sigma1_sq(LossKind kind, const SimParams& p);

struct PowerResult {
  std::vector<double> delta;
  CovMatrix omega;
  double noncentrality = 0.0;
  double tau = 0.0;
  double alp = 0.0;
};

// P{chi^2_q(delta' Omega^{-1} delta) > chi^2_{q,1-tau}(0)}.
PowerResult asymptotic_local_power(std::span<const double> delta,
                                   const CovMatrix& omega, double tau);

}  // namespace ecpa
