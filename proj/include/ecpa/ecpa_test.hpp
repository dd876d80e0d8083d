#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ecpa/loss.hpp"
#include "ecpa/stats.hpp"

namespace ecpa {

// Aligned evaluation data: proxy realizations, two competing forecasts,
// optional extra columns usable as instruments. Alignment is by row.
struct EvaluationPanel {
  std::vector<std::string> timestamps;  // optional passthrough metadata
  std::vector<double> proxy;
  std::vector<double> forecast1;
  std::vector<double> forecast2;
  std::map<std::string, std::vector<double>> extras;
  int horizon = 1;

  std::size_t size() const noexcept { return proxy.size(); }
  void validate() const;
};

struct Instrument {
  enum class Kind {
    Constant,
    LaggedProxy,
    LaggedLossDiff,
    LaggedExtra,
    LaggedProxyDiff
  };

  Kind kind = Kind::Constant;
  std::size_t lag = 0;
  std::string name_a, name_b;

  static Instrument constant();
  static Instrument lagged_proxy(std::size_t lag);
  static Instrument lagged_loss_diff(std::size_t lag);
  static Instrument lagged_extra(std::string name, std::size_t lag);
  static Instrument lagged_proxy_diff(std::string name_a, std::string name_b,
                                      std::size_t lag);

  std::string describe() const;
};

using InstrumentSpec = std::vector<Instrument>;

struct InstrumentMatrix {
  Matrix h;            // n_eff x q, rows aligned with panel index offset + r
  std::size_t offset;  // observations trimmed from the front (= max lag)
};

// Instrument rows use only data dated at least `horizon` periods before the
// observation they multiply; rows lost to lagging are trimmed from the front.
InstrumentMatrix build_instruments(const EvaluationPanel& panel,
                                   const InstrumentSpec& spec,
                                   const BregmanSpec& loss);
InstrumentMatrix build_instruments(const EvaluationPanel& panel,
                                   const InstrumentSpec& spec,
                                   const std::vector<double>& loss_diffs);

struct EcpaResult {
  std::size_t n_effective = 0;
  std::size_t df = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  std::vector<double> mean_moment;
  CovMatrix covariance;
  std::string cov_method;
  bool psd_repaired = false;
};

// Wald statistic n * mean(Z)' Omega^{-1} mean(Z) for Z_t = h_{t-1} d_t,
// with a chi-square(q) p-value. `d` is aligned with the panel the
// instrument matrix was built from.
EcpaResult ecpa_from_series(const std::vector<double>& d,
                            const InstrumentMatrix& instruments,
                            const InstrumentSpec& spec, const HacConfig& cov);

EcpaResult ecpa_statistic(const EvaluationPanel& panel, const BregmanSpec& loss,
                          const InstrumentSpec& instruments,
                          const HacConfig& cov);
EcpaResult ecpa_statistic(const EvaluationPanel& panel,
                          const QuantileLossSpec& loss,
                          const InstrumentSpec& instruments,
                          const HacConfig& cov);

// Conditional-unbiasedness test for a pair of proxies: the moment base is
// D_t = a_t - b_t and the covariance is the plain outer product.
EcpaResult proxy_unbiasedness_test(const std::vector<double>& proxy_a,
                                   const std::vector<double>& proxy_b,
                                   const InstrumentSpec& instruments);

// The five instrument sets used by the proxy conditional-unbiasedness
// workflow, in order; they reference columns "proxy_a" and "proxy_b".
std::vector<InstrumentSpec> instrument_presets_proxycheck();

// Default covariance: outer product for one-step evaluation, Bartlett with
// bandwidth horizon - 1 for multi-step forecasts.
HacConfig default_hac_for_horizon(int horizon);

}  // namespace ecpa
