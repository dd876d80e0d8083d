#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ecpa {

// Dense row-major matrix, sized for moment series (n x q with small q).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// Symmetric q x q covariance matrix.
class CovMatrix {
 public:
  CovMatrix() = default;
  explicit CovMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * dim_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * dim_ + j];
  }
  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  double trace() const;
  // Max |A_ij - A_ji|; the estimators below always produce 0.
  double asymmetry() const;
  // Eigenvalues in ascending order.
  std::vector<double> eigenvalues() const;
  // PSD up to tolerance: all eigenvalues >= -1e-10 * trace.
  bool is_psd() const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

struct HacConfig {
  enum class Weights { Bartlett, Uniform, Custom };
  std::size_t bandwidth = 0;
  Weights weights = Weights::Bartlett;
  std::vector<double> custom;  // custom[h-1] is the weight at lag h
};

struct HacResult {
  CovMatrix omega;
  bool psd_repaired = false;
};

// (1/n) sum_t Z_t Z_t'.
CovMatrix outer_covariance(const Matrix& z);

// (1/n) sum_t Z_t Z_t'
//   + (1/n) sum_{h=1}^{m} w_h sum_{t=h+1}^{n} (Z_t Z_{t-h}' + Z_{t-h} Z_t').
// Indefinite results are eigen-clipped at zero and flagged.
HacResult hac_covariance(const Matrix& z, const HacConfig& cfg);

// Central chi-square CDF / survival function / quantile.
double chi2_cdf(unsigned df, double x);
double chi2_sf(unsigned df, double x);
double chi2_quantile(unsigned df, double p);

// P{chi^2_df(lambda) > x} via the Poisson mixture of central chi-squares,
// truncated once the accumulated Poisson mass exceeds 1 - 1e-14.
double noncentral_chi2_sf(unsigned df, double lambda, double x);

// E|X| for X ~ N(m, s^2).
double folded_normal_mean(double m, double s);

// Standard normal CDF.
double normal_cdf(double z);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// A^{-1} v via Cholesky; quad_form_inv(A, v) = v' A^{-1} v.
// Throws SingularityError when A is not numerically positive definite.
std::vector<double> solve_spd(const CovMatrix& a, std::span<const double> v);
double quad_form_inv(const CovMatrix& a, std::span<const double> v);

}  // namespace ecpa
