#include "ecpa/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ecpa/errors.hpp"
#include "ecpa/rng.hpp"

namespace ecpa {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void require_in_domain(const BregmanSpec& spec, std::span<const double> x,
                       const char* role) {
  if (x.size() != spec.dim()) {
    std::ostringstream msg;
    msg << spec.name << ": " << role << " has dimension " << x.size()
        << ", expected " << spec.dim();
    throw ArgumentError(msg.str());
  }
  if (!spec.domain.contains(x)) {
    std::ostringstream msg;
    msg << spec.name << ": " << role << " lies outside the loss domain";
    throw std::domain_error(msg.str());
  }
}

}  // namespace

Box Box::unbounded(std::size_t k) {
  Box b;
  b.coords.assign(k, {-std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()});
  return b;
}

Box Box::positive(std::size_t k) {
  Box b;
  b.coords.assign(k, {0.0, std::numeric_limits<double>::infinity()});
  return b;
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != coords.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) return false;
    if (!(x[i] > coords[i].lo && x[i] < coords[i].hi)) return false;
  }
  return true;
}

std::vector<double> Box::sample(std::span<const double> unit) const {
  std::vector<double> out(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    // Map (0,1) into the interval; unbounded ends get a finite window.
    const double lo = std::isinf(coords[i].lo) ? -8.0 : coords[i].lo;
    const double hi = std::isinf(coords[i].hi)
                          ? std::max(lo + 16.0, lo * 2.0 + 16.0)
                          : coords[i].hi;
    const double u = std::min(std::max(unit[i], 1e-3), 1.0 - 1e-3);
    out[i] = lo + u * (hi - lo);
  }
  return out;
}

BregmanSpec squared_error_loss(std::size_t k) {
  BregmanSpec spec;
  spec.name = "se";
  spec.phi = [](std::span<const double> x) { return dot(x, x); };
  spec.dphi = [](std::span<const double> x) {
    std::vector<double> g(x.begin(), x.end());
    for (double& v : g) v *= 2.0;
    return g;
  };
  spec.domain = Box::unbounded(k);
  spec.phi1 = [](double x) { return x * x; };
  spec.dphi1 = [](double x) { return 2.0 * x; };
  return spec;
}

BregmanSpec qlike_loss(std::size_t k) {
  BregmanSpec spec;
  spec.name = "qlike";
  spec.phi = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s -= std::log(v);
    return s;
  };
  spec.dphi = [](std::span<const double> x) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = -1.0 / x[i];
    return g;
  };
  spec.domain = Box::positive(k);
  spec.phi1 = [](double x) { return -std::log(x); };
  spec.dphi1 = [](double x) { return -1.0 / x; };
  return spec;
}

double bregman_loss(const BregmanSpec& spec, std::span<const double> y,
                    std::span<const double> x) {
  require_in_domain(spec, x, "forecast");
  if (y.size() != spec.dim())
    throw ArgumentError(spec.name + ": observation dimension mismatch");
  for (double v : y)
    if (!std::isfinite(v))
      throw std::domain_error(spec.name + ": observation is not finite");
  const auto g = spec.dphi(x);
  double inner = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) inner += g[i] * (y[i] - x[i]);
  const double value = spec.phi(y) - spec.phi(x) - inner;
  if (!std::isfinite(value))
    throw std::domain_error(spec.name + ": observation outside the loss support");
  return value;
}

double loss_difference(const BregmanSpec& spec, std::span<const double> y,
                       std::span<const double> x1,
                       std::span<const double> x2) {
  return bregman_loss(spec, y, x1) - bregman_loss(spec, y, x2);
}

AffineDecomposition affine_decomposition(const BregmanSpec& spec,
                                         std::span<const double> x1,
                                         std::span<const double> x2) {
  require_in_domain(spec, x1, "forecast 1");
  require_in_domain(spec, x2, "forecast 2");
  const auto g1 = spec.dphi(x1);
  const auto g2 = spec.dphi(x2);
  AffineDecomposition out;
  out.offset = spec.phi(x2) - spec.phi(x1) + dot(g1, x1) - dot(g2, x2);
  out.slope.resize(spec.dim());
  for (std::size_t i = 0; i < spec.dim(); ++i) out.slope[i] = g2[i] - g1[i];
  return out;
}

double bregman_loss(const BregmanSpec& spec, double y, double x) {
  if (spec.dim() == 1 && spec.phi1 && spec.dphi1) {
    require_in_domain(spec, std::span<const double>{&x, 1}, "forecast");
    if (!std::isfinite(y))
      throw std::domain_error(spec.name + ": observation is not finite");
    const double value = spec.phi1(y) - spec.phi1(x) - spec.dphi1(x) * (y - x);
    if (!std::isfinite(value))
      throw std::domain_error(spec.name +
                              ": observation outside the loss support");
    return value;
  }
  return bregman_loss(spec, std::span<const double>{&y, 1},
                      std::span<const double>{&x, 1});
}

double loss_difference(const BregmanSpec& spec, double y, double x1,
                       double x2) {
  return bregman_loss(spec, y, x1) - bregman_loss(spec, y, x2);
}

void validate_bregman(const BregmanSpec& spec, std::size_t samples,
                      std::uint64_t seed) {
  RngStream rng(seed);
  const std::size_t k = spec.dim();
  std::vector<double> ux(k), uy(k);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < k; ++i) {
      ux[i] = rng.uniform();
      uy[i] = rng.uniform();
    }
    const auto x = spec.domain.sample(ux);
    const auto y = spec.domain.sample(uy);
    double dist = 0.0;
    for (std::size_t i = 0; i < k; ++i) dist += std::abs(x[i] - y[i]);
    if (dist < 1e-9) continue;

    const double lambda = 0.25 + 0.5 * rng.uniform();
    std::vector<double> mid(k);
    for (std::size_t i = 0; i < k; ++i)
      mid[i] = lambda * x[i] + (1.0 - lambda) * y[i];
    const double chord =
        lambda * spec.phi(x) + (1.0 - lambda) * spec.phi(y);
    if (!(spec.phi(mid) < chord + 1e-12))
      throw ArgumentError(spec.name +
                          ": strict convexity probe failed for the generator");

    const auto g = spec.dphi(x);
    double inner = 0.0;
    for (std::size_t i = 0; i < k; ++i) inner += g[i] * (y[i] - x[i]);
    if (spec.phi(y) + 1e-12 < spec.phi(x) + inner)
      throw ArgumentError(spec.name + ": subgradient inequality probe failed");
  }
}

QuantileLossSpec pinball_loss(double alpha, double lo, double hi) {
  QuantileLossSpec spec;
  spec.alpha = alpha;
  spec.g = [](double x) { return x; };
  spec.support_lo = lo;
  spec.support_hi = hi;
  return spec;
}

double quantile_loss(const QuantileLossSpec& spec, double y, double x) {
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
    throw ArgumentError("quantile_loss: alpha must lie in (0, 1)");
  if (!(y >= spec.support_lo && y <= spec.support_hi) || !std::isfinite(y))
    throw std::domain_error("quantile_loss: observation outside support");
  if (!(x >= spec.support_lo && x <= spec.support_hi) || !std::isfinite(x))
    throw std::domain_error("quantile_loss: forecast outside support");
  const double indicator = (x >= y) ? 1.0 : 0.0;
  return (indicator - spec.alpha) * (spec.g(x) - spec.g(y));
}

void validate_quantile_spec(const QuantileLossSpec& spec, std::size_t samples,
                            std::uint64_t seed) {
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
    throw ArgumentError("quantile spec: alpha must lie in (0, 1)");
  if (!(spec.support_lo < spec.support_hi))
    throw ArgumentError("quantile spec: empty support");
  RngStream rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    double a = spec.support_lo +
               rng.uniform() * (spec.support_hi - spec.support_lo);
    double b = spec.support_lo +
               rng.uniform() * (spec.support_hi - spec.support_lo);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!(spec.g(a) < spec.g(b)))
      throw ArgumentError("quantile spec: g is not strictly increasing");
  }
}

}  // namespace ecpa
