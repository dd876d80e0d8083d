#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ecpa/errors.hpp"
#include "ecpa/loss.hpp"
#include "ecpa/rng.hpp"
#include "ecpa/stats.hpp"

using namespace ecpa;

TEST_CASE("squared error loss values") {
  const auto se = squared_error_loss(1);
  CHECK(bregman_loss(se, 1.0, 0.5) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(bregman_loss(se, 3.7, 3.7) == 0.0);
  CHECK(bregman_loss(se, -2.0, 1.0) == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("qlike loss values") {
  const auto ql = qlike_loss(1);
  // phi(x) = -log x gives y/x - 1 - log(y/x).
  CHECK(bregman_loss(ql, 2.0, 1.0) ==
        doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-13));
  CHECK(bregman_loss(ql, 1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(bregman_loss(ql, 2.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(bregman_loss(ql, -2.0, 1.0), std::domain_error);
}

TEST_CASE("loss differences") {
  const auto se = squared_error_loss(1);
  CHECK(loss_difference(se, 2.0, 1.0, 3.0) == 0.0);
  CHECK(loss_difference(se, 0.0, 1.0, 2.0) ==
        doctest::Approx(-3.0).epsilon(1e-14));
  CHECK(loss_difference(se, 1.5, 1.0, 0.0) ==
        doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("affine decomposition of the loss difference") {
  const auto se = squared_error_loss(1);
  const auto d13 = affine_decomposition(se, std::vector<double>{1.0},
                                        std::vector<double>{3.0});
  CHECK(d13.offset == doctest::Approx(-8.0).epsilon(1e-14));
  CHECK(d13.slope[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(d13.offset + d13.slope[0] * 2.0 == doctest::Approx(0.0));

  const auto same = affine_decomposition(se, std::vector<double>{0.7},
                                         std::vector<double>{0.7});
  CHECK(same.offset == 0.0);
  CHECK(same.slope[0] == 0.0);

  // qlike, x1 = 1, x2 = 2: offset = -log 2, slope = 1/2.
  const auto ql = qlike_loss(1);
  const auto d12 = affine_decomposition(ql, std::vector<double>{1.0},
                                        std::vector<double>{2.0});
  CHECK(d12.offset == doctest::Approx(-std::log(2.0)).epsilon(1e-13));
  CHECK(d12.slope[0] == doctest::Approx(0.5).epsilon(1e-13));
  RngStream rng(11);
  for (int i = 0; i < 10; ++i) {
    const double y = 0.2 + 4.0 * rng.uniform();
    CHECK(d12.offset + d12.slope[0] * y ==
          doctest::Approx(loss_difference(ql, y, 1.0, 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("loss difference is antisymmetric and matches the affine form") {
  RngStream rng(42);
  const auto se = squared_error_loss(1);
  const auto ql = qlike_loss(1);
  for (int i = 0; i < 100; ++i) {
    const double y = rng.normal(0.0, 3.0);
    const double x1 = rng.normal(0.0, 3.0);
    const double x2 = rng.normal(0.0, 3.0);
    const double d = loss_difference(se, y, x1, x2);
    CHECK(d == -loss_difference(se, y, x2, x1));
    const auto ab = affine_decomposition(se, std::vector<double>{x1},
                                         std::vector<double>{x2});
    CHECK(std::abs(d - (ab.offset + ab.slope[0] * y)) < 1e-12);

    const double yq = 0.05 + 5.0 * rng.uniform();
    const double q1 = 0.05 + 5.0 * rng.uniform();
    const double q2 = 0.05 + 5.0 * rng.uniform();
    const double dq = loss_difference(ql, yq, q1, q2);
    CHECK(dq == -loss_difference(ql, yq, q2, q1));
    const auto abq = affine_decomposition(ql, std::vector<double>{q1},
                                          std::vector<double>{q2});
    CHECK(std::abs(dq - (abq.offset + abq.slope[0] * yq)) < 1e-12);
  }
}

TEST_CASE("bregman losses are nonnegative and vanish only at the forecast") {
  RngStream rng(17);
  const auto se = squared_error_loss(1);
  const auto ql = qlike_loss(1);
  for (int i = 0; i < 200; ++i) {
    const double y = rng.normal(0.0, 2.0);
    const double x = rng.normal(0.0, 2.0);
    CHECK(bregman_loss(se, y, x) >= 0.0);
    const double yq = 0.1 + 3.0 * rng.uniform();
    const double xq = 0.1 + 3.0 * rng.uniform();
    CHECK(bregman_loss(ql, yq, xq) >= -1e-14);
  }
}

TEST_CASE("equal sample means make proxy and target loss sums agree") {
  // With fixed forecasts, the loss difference is affine in the observation,
  // so matching first moments force matching mean loss differences.
  RngStream rng(23);
  const auto se = squared_error_loss(1);
  const std::size_t n = 1000;
  std::vector<double> y(n), y_hat(n);
  double noise_mean = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    y[t] = rng.normal(1.0, 1.0);
    const double noise = rng.normal(0.0, 0.7);
    y_hat[t] = noise;
    noise_mean += noise;
  }
  noise_mean /= static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) y_hat[t] = y[t] + y_hat[t] - noise_mean;

  const double x1 = 0.4, x2 = 1.9;
  double sum_y = 0.0, sum_hat = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    sum_y += loss_difference(se, y[t], x1, x2);
    sum_hat += loss_difference(se, y_hat[t], x1, x2);
  }
  CHECK(std::abs(sum_hat - sum_y) / static_cast<double>(n) < 1e-10);

  // The analytic discrepancy is <slope, mean(y_hat) - mean(y)> = 0.
  const auto ab = affine_decomposition(se, std::vector<double>{x1},
                                       std::vector<double>{x2});
  double mean_gap = 0.0;
  for (std::size_t t = 0; t < n; ++t) mean_gap += y_hat[t] - y[t];
  mean_gap /= static_cast<double>(n);
  CHECK(std::abs(ab.slope[0] * mean_gap) < 1e-12);
}

TEST_CASE("expected loss is minimized at the conditional mean") {
  // Discretized N(mu, sigma^2); the best grid forecast is the point
  // closest to mu for both catalog losses.
  const auto check_loss = [](const BregmanSpec& spec, double mu, double sigma,
                             double grid_lo, double grid_hi) {
    std::vector<double> ys, pm;
    const int bins = 400;
    const double lo = mu - 5 * sigma, hi = mu + 5 * sigma;
    for (int i = 0; i < bins; ++i) {
      const double a = lo + (hi - lo) * i / bins;
      const double b = lo + (hi - lo) * (i + 1) / bins;
      ys.push_back(0.5 * (a + b));
      pm.push_back(normal_cdf((b - mu) / sigma) - normal_cdf((a - mu) / sigma));
    }
    double best_x = 0.0, best_loss = std::numeric_limits<double>::infinity();
    for (double x = grid_lo; x <= grid_hi; x += 0.0137) {
      double acc = 0.0;
      for (std::size_t i = 0; i < ys.size(); ++i)
        acc += pm[i] * bregman_loss(spec, ys[i], x);
      if (acc < best_loss) {
        best_loss = acc;
        best_x = x;
      }
    }
    CHECK(std::abs(best_x - mu) < 0.0137);
  };
  check_loss(squared_error_loss(1), 0.8, 0.3, -0.5, 2.1);
  check_loss(qlike_loss(1), 2.0, 0.2, 1.2, 2.8);
}

TEST_CASE("generator probes reject invalid specs") {
  BregmanSpec cubic;
  cubic.name = "cubic";
  cubic.phi = [](std::span<const double> x) { return x[0] * x[0] * x[0]; };
  cubic.dphi = [](std::span<const double> x) {
    return std::vector<double>{3.0 * x[0] * x[0]};
  };
  cubic.domain = Box::unbounded(1);
  CHECK_THROWS_AS(validate_bregman(cubic), ArgumentError);

  BregmanSpec bad_grad = squared_error_loss(1);
  bad_grad.phi1 = {};
  bad_grad.dphi1 = {};
  bad_grad.dphi = [](std::span<const double>) {
    return std::vector<double>{1.0};
  };
  CHECK_THROWS_AS(validate_bregman(bad_grad), ArgumentError);

  CHECK_NOTHROW(validate_bregman(squared_error_loss(1)));
  CHECK_NOTHROW(validate_bregman(qlike_loss(1)));
  CHECK_NOTHROW(validate_bregman(squared_error_loss(3)));
  CHECK_NOTHROW(validate_bregman(qlike_loss(2)));
}

TEST_CASE("multivariate losses") {
  const auto se3 = squared_error_loss(3);
  const std::vector<double> y{1.0, 2.0, 3.0}, x{0.0, 2.0, 5.0};
  CHECK(bregman_loss(se3, y, x) == doctest::Approx(5.0).epsilon(1e-13));

  RngStream rng(31);
  for (int i = 0; i < 30; ++i) {
    std::vector<double> yy(3), x1(3), x2(3);
    for (int k = 0; k < 3; ++k) {
      yy[k] = rng.normal();
      x1[k] = rng.normal();
      x2[k] = rng.normal();
    }
    const double d = loss_difference(se3, yy, x1, x2);
    const auto ab = affine_decomposition(se3, x1, x2);
    double affine = ab.offset;
    for (int k = 0; k < 3; ++k) affine += ab.slope[k] * yy[k];
    CHECK(std::abs(d - affine) < 1e-12);
  }

  const auto ql2 = qlike_loss(2);
  CHECK_THROWS_AS(
      bregman_loss(ql2, std::vector<double>{1.0, 1.0},
                   std::vector<double>{1.0, -0.5}),
      std::domain_error);
  CHECK_THROWS_AS(bregman_loss(se3, std::vector<double>{1.0}, x),
                  ArgumentError);
}

TEST_CASE("quantile loss values and domain checks") {
  const auto median = pinball_loss(0.5, -10.0, 10.0);
  CHECK(quantile_loss(median, 1.0, 3.0) == doctest::Approx(1.0));
  CHECK(quantile_loss(median, 3.0, 1.0) == doctest::Approx(1.0));
  const auto q90 = pinball_loss(0.9, -10.0, 10.0);
  CHECK(quantile_loss(q90, 0.0, 1.0) == doctest::Approx(0.1).epsilon(1e-13));
  CHECK_THROWS_AS(quantile_loss(median, 11.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(quantile_loss(median, 0.0, -11.0), std::domain_error);

  RngStream rng(3);
  for (int i = 0; i < 100; ++i) {
    const double y = rng.normal(0.0, 2.0), x = rng.normal(0.0, 2.0);
    CHECK(quantile_loss(q90, y, x) >= 0.0);
  }

  QuantileLossSpec decreasing = pinball_loss(0.5, -1.0, 1.0);
  decreasing.g = [](double x) { return -x; };
  CHECK_THROWS_AS(validate_quantile_spec(decreasing), ArgumentError);
  QuantileLossSpec bad_alpha = pinball_loss(0.5, -1.0, 1.0);
  bad_alpha.alpha = 1.5;
  CHECK_THROWS_AS(validate_quantile_spec(bad_alpha), ArgumentError);
}
