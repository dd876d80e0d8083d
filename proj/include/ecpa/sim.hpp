#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ecpa/loss.hpp"
#include "ecpa/power.hpp"
#include "ecpa/rng.hpp"
#include "ecpa/stats.hpp"

namespace ecpa {

// One simulated panel: latent target, proxy, the two forecasts, and the
// conditional-mean series the forecasts aim at.
struct DgpDraw {
  std::vector<double> y;
  std::vector<double> y_hat;
  std::vector<double> x1;
  std::vector<double> x2;
  std::vector<double> x_star;
};

// Simulates p.n observations of the AR(1)-plus-noise design. The initial
// state is drawn from the stationary law; the forecast noise entering x1 at
// time t is dated t-1, so one extra noise draw seeds the first forecast.
DgpDraw simulate_path(const SimParams& p, double sigma1_sq, RngStream& rng);

// Worker count for simulation loops: ECPA_THREADS when set and nonzero,
// otherwise the hardware concurrency.
unsigned resolve_threads(unsigned requested = 0);

struct CellConfig {
  SimParams base;  // mu, ar_coeff, sigma_eps2; n/xi/sigma_hat2 set per cell
  Snr zeta = Snr::infinity();
  double xi = 0.0;
  std::size_t n = 500;
  LossKind loss = LossKind::SquaredError;
  std::size_t reps = 10000;
  double tau = 0.05;
  std::uint64_t seed = 0;
  std::uint64_t cell_key = 0;
  bool collect_details = false;
  unsigned threads = 0;
};

struct CellResult {
  double reject_freq = 0.0;
  double mc_se = 0.0;
  std::size_t reps = 0;
  std::size_t errored = 0;
  // Per-replication values when collect_details was set (NaN for errored
  // replications), ordered by replication index.
  std::vector<double> p_values;
  std::vector<double> statistics;
};

// Rejection frequency of the panel test across replications of one design
// cell. The test uses instruments (1, proxy_{t-1}) with outer-product
// covariance and exactly n moment observations.
CellResult run_cell(const CellConfig& cell);

struct ExperimentGrid {
  std::vector<double> xi_grid;
  std::vector<Snr> zeta_grid;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 10000;
  double tau = 0.05;
  LossKind loss = LossKind::SquaredError;
  SimParams base;
  std::uint64_t seed = 0;
  bool common_random_numbers = false;
  unsigned threads = 0;
};

struct RejectionRow {
  LossKind loss;
  double xi;
  Snr zeta = Snr::infinity();
  std::size_t n;
  std::size_t reps;
  double reject_freq;
  double mc_se;
  std::optional<double> alp;
  std::size_t errored = 0;
};

struct RejectionTable {
  std::vector<RejectionRow> rows;
};

// One row per (zeta, n, xi) cell; the analytic local-power overlay is
// filled for squared error and absent for absolute error. Deterministic
// for a fixed seed regardless of worker count. `progress` is invoked after
// each finished cell.
RejectionTable run_grid(
    const ExperimentGrid& grid,
    const std::function<void(const RejectionRow&)>& progress = {});

enum class TableFormat { Csv, Json };

void emit_table(const RejectionTable& table, TableFormat format,
                std::ostream& out);
RejectionTable parse_table_json(const std::string& text);

// Empirical check of the proxy-variance decomposition: the moment
// covariance estimated from proxy evaluations dominates the one estimated
// against the conditional mean itself.
struct ProxyVarianceReport {
  CovMatrix omega_proxy;
  CovMatrix omega_target;
  double min_eigenvalue = 0.0;  // of omega_proxy - omega_target
  double mc_tolerance = 0.0;    // 3 * largest entrywise MC standard error
  bool within_tolerance = false;
  std::size_t draws = 0;
};

ProxyVarianceReport proxy_variance_decomposition_check(
    const std::vector<DgpDraw>& draws, const BregmanSpec& loss);

}  // namespace ecpa
