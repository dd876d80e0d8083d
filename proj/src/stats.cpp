#include "ecpa/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ecpa/errors.hpp"

namespace ecpa {
namespace {

Eigen::Map<const Eigen::MatrixXd> as_eigen(const CovMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.dim());
  return {a.data().data(), n, n};
}

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NumericalError("incomplete gamma series failed to converge");
}

// Continued fraction for Q(a, x) (modified Lentz), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NumericalError("incomplete gamma continued fraction failed to converge");
}

// Acklam's rational approximation to the standard normal quantile, used
// only as a Newton starting point.
double normal_quantile_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double chi2_log_pdf(unsigned df, double x) {
  const double a = 0.5 * df;
  return (a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) -
         std::lgamma(a);
}

}  // namespace

double gamma_p(double a, double x) {
  if (a <= 0.0) throw ArgumentError("gamma_p: shape must be positive");
  if (x < 0.0) throw ArgumentError("gamma_p: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (a <= 0.0) throw ArgumentError("gamma_q: shape must be positive");
  if (x < 0.0) throw ArgumentError("gamma_q: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_cdf(unsigned df, double x) {
  if (df == 0) throw ArgumentError("chi2_cdf: df must be >= 1");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_sf(unsigned df, double x) {
  if (df == 0) throw ArgumentError("chi2_sf: df must be >= 1");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

double chi2_quantile(unsigned df, double p) {
  if (df == 0) throw ArgumentError("chi2_quantile: df must be >= 1");
  if (!(p > 0.0 && p < 1.0))
    throw ArgumentError("chi2_quantile: p must lie in (0, 1)");

  // Wilson-Hilferty start, then Newton on the CDF.
  const double z = normal_quantile_approx(p);
  const double f = static_cast<double>(df);
  double x = f * std::pow(1.0 - 2.0 / (9.0 * f) + z * std::sqrt(2.0 / (9.0 * f)), 3);
  if (!(x > 0.0)) x = 0.5 * f;

  for (int it = 0; it < 100; ++it) {
    const double err = chi2_cdf(df, x) - p;
    const double step = err / std::exp(chi2_log_pdf(df, x));
    double next = x - step;
    if (next <= 0.0) next = 0.5 * x;
    if (std::abs(next - x) <= 1e-12 * std::max(1.0, x)) return next;
    x = next;
  }
  throw NumericalError("chi2_quantile: Newton iteration did not converge");
}

double noncentral_chi2_sf(unsigned df, double lambda, double x) {
  if (df == 0) throw ArgumentError("noncentral_chi2_sf: df must be >= 1");
  if (lambda < 0.0)
    throw ArgumentError("noncentral_chi2_sf: noncentrality must be >= 0");
  if (x < 0.0) return 1.0;
  if (lambda == 0.0) return chi2_sf(df, x);

  // sf(x) = sum_j Pois(j; lambda/2) * sf_central(x; df + 2j). Since each
  // central survival probability is <= 1, stopping once the accumulated
  // Poisson mass exceeds 1 - 1e-14 bounds the truncation error by 1e-14.
  const double half = 0.5 * lambda;
  double weight = std::exp(-half);
  double mass = weight;
  double result = weight * chi2_sf(df, x);
  const std::size_t budget = 100000;
  for (std::size_t j = 1; j <= budget; ++j) {
    weight *= half / static_cast<double>(j);
    mass += weight;
    result += weight * chi2_sf(df + 2 * static_cast<unsigned>(j), x);
    if (mass > 1.0 - 1e-14) return std::min(result, 1.0);
  }
  throw NumericalError(
      "noncentral_chi2_sf: Poisson mixture did not converge within term "
      "budget");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double folded_normal_mean(double m, double s) {
  if (!(s > 0.0))
    throw ArgumentError("folded_normal_mean: standard deviation must be > 0");
  return s * std::sqrt(2.0 / M_PI) * std::exp(-m * m / (2.0 * s * s)) +
         m * (1.0 - 2.0 * normal_cdf(-m / s));
}

double CovMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double CovMatrix::asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i + 1; j < dim_; ++j)
      worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
  return worst;
}

std::vector<double> CovMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(as_eigen(*this));
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

bool CovMatrix::is_psd() const {
  const auto ev = eigenvalues();
  return ev.empty() || ev.front() >= -1e-10 * std::max(trace(), 1e-300);
}

CovMatrix outer_covariance(const Matrix& z) {
  const std::size_t n = z.rows(), q = z.cols();
  if (n == 0 || q == 0) throw ArgumentError("outer_covariance: empty input");
  CovMatrix omega(q);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = i; j < q; ++j) omega(i, j) += z(t, i) * z(t, j);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = i; j < q; ++j) {
      omega(i, j) /= static_cast<double>(n);
      omega(j, i) = omega(i, j);
    }
  return omega;
}

HacResult hac_covariance(const Matrix& z, const HacConfig& cfg) {
  const std::size_t n = z.rows(), q = z.cols();
  if (n == 0 || q == 0) throw ArgumentError("hac_covariance: empty input");
  if (cfg.bandwidth >= n)
    throw ArgumentError("hac_covariance: bandwidth must be < n");
  if (cfg.weights == HacConfig::Weights::Custom) {
    if (cfg.custom.size() < cfg.bandwidth)
      throw ArgumentError(
          "hac_covariance: custom weights shorter than bandwidth");
    for (double w : cfg.custom)
      if (!std::isfinite(w))
        throw ArgumentError("hac_covariance: custom weights must be finite");
  }

  CovMatrix omega = outer_covariance(z);
  for (std::size_t h = 1; h <= cfg.bandwidth; ++h) {
    double w = 1.0;
    switch (cfg.weights) {
      case HacConfig::Weights::Bartlett:
        w = 1.0 - static_cast<double>(h) / static_cast<double>(cfg.bandwidth + 1);
        break;
      case HacConfig::Weights::Uniform:
        w = 1.0;
        break;
      case HacConfig::Weights::Custom:
        w = cfg.custom[h - 1];
        break;
    }
    CovMatrix lag(q);
    for (std::size_t t = h; t < n; ++t)
      for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j) lag(i, j) += z(t, i) * z(t - h, j);
    const double scale = w / static_cast<double>(n);
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q; ++j)
        omega(i, j) += scale * (lag(i, j) + lag(j, i));
  }

  HacResult out{std::move(omega), false};
  if (cfg.bandwidth > 0 && !out.omega.is_psd()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(as_eigen(out.omega));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd repaired =
        es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q; ++j)
        out.omega(i, j) =
            0.5 * (repaired(static_cast<Eigen::Index>(i),
                            static_cast<Eigen::Index>(j)) +
                   repaired(static_cast<Eigen::Index>(j),
                            static_cast<Eigen::Index>(i)));
    out.psd_repaired = true;
  }
  return out;
}

std::vector<double> solve_spd(const CovMatrix& a, std::span<const double> v) {
  const std::size_t q = a.dim();
  if (v.size() != q)
    throw ArgumentError("solve_spd: dimension mismatch");
  const auto ea = as_eigen(a);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ea, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  const double tr = std::max(a.trace(), 0.0);
  if (!(lo > 1e-12 * std::max(tr, 1e-300))) {
    const double cond =
        (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
    std::ostringstream msg;
    msg << "solve_spd: matrix is singular or near-singular (min eigenvalue "
        << lo << ", condition estimate " << cond << ")";
    throw SingularityError(msg.str(), cond);
  }

  Eigen::Map<const Eigen::VectorXd> ev(v.data(),
                                       static_cast<Eigen::Index>(q));
  Eigen::VectorXd x = ea.llt().solve(ev);
  return {x.data(), x.data() + x.size()};
}

double quad_form_inv(const CovMatrix& a, std::span<const double> v) {
  const auto x = solve_spd(a, v);
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * x[i];
  return acc;
}

}  // namespace ecpa
