#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ecpa {

// Per-coordinate open interval box, the domain A of a Bregman generator.
struct Box {
  struct Interval {
    double lo, hi;  // open interval (lo, hi)
  };
  std::vector<Interval> coords;

  static Box unbounded(std::size_t k);
  static Box positive(std::size_t k);
  std::size_t dim() const noexcept { return coords.size(); }
  bool contains(std::span<const double> x) const;
  // Midpoint-ish interior sample used by the convexity probes.
  std::vector<double> sample(std::span<const double> unit) const;
};

// Loss family L(y, x) = phi(y) - phi(x) - <dphi(x), y - x> for a strictly
// convex generator phi with subgradient dphi on domain A. The y-only term
// of the general family is never stored: it cancels in every difference
// this library exposes.
struct BregmanSpec {
  std::string name;
  std::function<double(std::span<const double>)> phi;
  std::function<std::vector<double>(std::span<const double>)> dphi;
  Box domain;
  // Optional allocation-free scalar route, used when k = 1. The catalog
  // specs provide it; custom specs may leave it empty.
  std::function<double(double)> phi1;
  std::function<double(double)> dphi1;

  std::size_t dim() const noexcept { return domain.dim(); }
};

// Built-in catalog.
BregmanSpec squared_error_loss(std::size_t k = 1);
BregmanSpec qlike_loss(std::size_t k = 1);

double bregman_loss(const BregmanSpec& spec, std::span<const double> y,
                    std::span<const double> x);
double loss_difference(const BregmanSpec& spec, std::span<const double> y,
                       std::span<const double> x1, std::span<const double> x2);

// d(y, x1, x2) = offset + <slope, y> for all y; slope = dphi(x2) - dphi(x1).
struct AffineDecomposition {
  double offset;
  std::vector<double> slope;
};
AffineDecomposition affine_decomposition(const BregmanSpec& spec,
                                         std::span<const double> x1,
                                         std::span<const double> x2);

// Scalar conveniences for the univariate case.
double bregman_loss(const BregmanSpec& spec, double y, double x);
double loss_difference(const BregmanSpec& spec, double y, double x1,
                       double x2);

// Probes for the type invariants: sampled strict convexity and the
// subgradient inequality. Throw ArgumentError on violation.
void validate_bregman(const BregmanSpec& spec, std::size_t samples = 64,
                      std::uint64_t seed = 1);

// Quantile loss (1{x >= y} - alpha) * (g(x) - g(y)) on a bounded support,
// with g strictly increasing.
struct QuantileLossSpec {
  double alpha;
  std::function<double(double)> g;
  double support_lo, support_hi;
};

QuantileLossSpec pinball_loss(double alpha, double lo = -1e6, double hi = 1e6);

double quantile_loss(const QuantileLossSpec& spec, double y, double x);

void validate_quantile_spec(const QuantileLossSpec& spec,
                            std::size_t samples = 64, std::uint64_t seed = 1);

}  // namespace ecpa
