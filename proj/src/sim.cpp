#include "ecpa/sim.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>
#include <functional>
#include <thread>

#include <json.hpp>

#include "ecpa/ecpa_test.hpp"
#include "ecpa/errors.hpp"

namespace ecpa {
namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string loss_name(LossKind kind) {
  return kind == LossKind::SquaredError ? "se" : "ae";
}

LossKind loss_from_name(const std::string& name) {
  if (name == "se") return LossKind::SquaredError;
  if (name == "ae") return LossKind::AbsoluteError;
  throw DataError("unknown loss kind '" + name + "' in table");
}

}  // namespace

DgpDraw simulate_path(const SimParams& p, double sigma1_sq, RngStream& rng) {
  p.validate();
  if (sigma1_sq < 0.0)
    throw ArgumentError("simulate_path: forecast-noise variance must be >= 0");

  const std::size_t n = p.n;
  const double level = p.mu * (1.0 - p.ar_coeff);
  const double sd_eps = std::sqrt(p.sigma_eps2);
  const double sd_hat = std::sqrt(p.sigma_hat2);
  const double sd_one = std::sqrt(sigma1_sq);

  DgpDraw draw;
  draw.y.resize(n);
  draw.y_hat.resize(n);
  draw.x1.resize(n);
  draw.x2.resize(n);
  draw.x_star.resize(n);

  double y_prev = rng.normal(p.mu, std::sqrt(stationary_variance(p)));
  double e1_prev = sd_one * rng.normal();
  for (std::size_t t = 0; t < n; ++t) {
    const double eps = sd_eps * rng.normal();
    const double eps_hat = sd_hat * rng.normal();
    const double cond_mean = level + p.ar_coeff * y_prev;
    draw.y[t] = cond_mean + eps;
    draw.y_hat[t] = draw.y[t] + eps_hat;
    draw.x_star[t] = cond_mean;
    draw.x1[t] = cond_mean + e1_prev;
    draw.x2[t] = p.ar_coeff * y_prev;
    e1_prev = sd_one * rng.normal();
    y_prev = draw.y[t];
  }
  return draw;
}

unsigned resolve_threads(unsigned requested) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned workers = requested != 0 ? requested : hw;
  if (const char* env = std::getenv("ECPA_THREADS")) {
    unsigned cap = 0;
    const auto res = std::from_chars(env, env + std::strlen(env), cap);
    if (res.ec == std::errc{} && cap != 0) workers = std::min(workers, cap);
  }
  return std::max(workers, 1u);
}

CellResult run_cell(const CellConfig& cell) {
  if (cell.reps < 1) throw ArgumentError("run_cell: reps must be >= 1");
  if (!(cell.tau > 0.0 && cell.tau < 1.0))
    throw ArgumentError("run_cell: tau must lie in (0, 1)");

  SimParams params = cell.base;
  params.n = cell.n + 1;  // one leading observation feeds the lagged instrument
  params.xi = cell.xi;
  params.sigma_hat2 = snr_to_sigma_hat2(cell.zeta, cell.base);
  params.validate();

  const double sigma1_sq = null_sigma1_sq(cell.loss, cell.base) +
                           cell.xi / std::sqrt(static_cast<double>(cell.n));
  if (sigma1_sq < 0.0) {
    std::ostringstream msg;
    msg << "run_cell: xi = " << cell.xi << " drives the forecast-noise "
        << "variance negative at n = " << cell.n;
    throw ArgumentError(msg.str());
  }

  const BregmanSpec se_spec = squared_error_loss(1);
  const InstrumentSpec instruments = {Instrument::constant(),
                                      Instrument::lagged_proxy(1)};
  const HacConfig cov{};  // outer product

  std::vector<double> p_values(cell.reps,
                               std::numeric_limits<double>::quiet_NaN());
  std::vector<double> statistics(cell.reps,
                                 std::numeric_limits<double>::quiet_NaN());
  std::vector<unsigned char> rejected(cell.reps, 0);
  std::vector<unsigned char> errored(cell.reps, 0);

  auto worker = [&](std::size_t lo, std::size_t hi,
                    std::exception_ptr& failure) {
    try {
      for (std::size_t rep = lo; rep < hi; ++rep) {
        RngStream rng =
            RngStream::keyed(cell.seed, cell.cell_key, rep, 0x6d635f63656c6cULL);
        DgpDraw draw = simulate_path(params, sigma1_sq, rng);

        EvaluationPanel panel;
        panel.proxy = std::move(draw.y_hat);
        panel.forecast1 = std::move(draw.x1);
        panel.forecast2 = std::move(draw.x2);
        panel.horizon = 1;

        try {
          EcpaResult result;
          if (cell.loss == LossKind::SquaredError) {
            result = ecpa_statistic(panel, se_spec, instruments, cov);
          } else {
            std::vector<double> d(panel.size());
            for (std::size_t t = 0; t < panel.size(); ++t)
              d[t] = std::abs(panel.proxy[t] - panel.forecast1[t]) -
                     std::abs(panel.proxy[t] - panel.forecast2[t]);
            const InstrumentMatrix h = build_instruments(panel, instruments, d);
            result = ecpa_from_series(d, h, instruments, cov);
          }
          p_values[rep] = result.p_value;
          statistics[rep] = result.statistic;
          rejected[rep] = result.p_value < cell.tau ? 1 : 0;
        } catch (const NumericalError&) {
          errored[rep] = 1;
        }
      }
    } catch (...) {
      failure = std::current_exception();
    }
  };

  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(cell.threads),
                                                  cell.reps));
  std::vector<std::exception_ptr> failures(workers);
  if (workers <= 1) {
    worker(0, cell.reps, failures[0]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (cell.reps + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(cell.reps, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi, std::ref(failures[w]));
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  std::size_t n_err = 0, n_rej = 0;
  for (std::size_t rep = 0; rep < cell.reps; ++rep) {
    n_err += errored[rep];
    n_rej += rejected[rep];
  }
  const std::size_t used = cell.reps - n_err;
  if (used == 0)
    throw NumericalError("run_cell: every replication failed numerically");

  CellResult out;
  out.reps = used;
  out.errored = n_err;
  out.reject_freq = static_cast<double>(n_rej) / static_cast<double>(used);
  out.mc_se = std::sqrt(out.reject_freq * (1.0 - out.reject_freq) /
                        static_cast<double>(used));
  if (cell.collect_details) {
    out.p_values = std::move(p_values);
    out.statistics = std::move(statistics);
  }
  return out;
}

RejectionTable run_grid(
    const ExperimentGrid& grid,
    const std::function<void(const RejectionRow&)>& progress) {
  if (grid.reps < 1) throw ArgumentError("run_grid: reps must be >= 1");
  if (grid.xi_grid.empty() || grid.zeta_grid.empty() || grid.n_grid.empty())
    throw ArgumentError("run_grid: grids must not be empty");
  if (!(grid.tau > 0.0 && grid.tau < 1.0))
    throw ArgumentError("run_grid: tau must lie in (0, 1)");

  RejectionTable table;
  table.rows.reserve(grid.xi_grid.size() * grid.zeta_grid.size() *
                     grid.n_grid.size());

  for (std::size_t zi = 0; zi < grid.zeta_grid.size(); ++zi) {
    const Snr zeta = grid.zeta_grid[zi];
    for (std::size_t ni = 0; ni < grid.n_grid.size(); ++ni) {
      for (std::size_t xj = 0; xj < grid.xi_grid.size(); ++xj) {
        CellConfig cell;
        cell.base = grid.base;
        cell.zeta = zeta;
        cell.xi = grid.xi_grid[xj];
        cell.n = grid.n_grid[ni];
        cell.loss = grid.loss;
        cell.reps = grid.reps;
        cell.tau = grid.tau;
        cell.seed = grid.seed;
        const std::uint64_t zeta_key =
            grid.common_random_numbers ? 0 : zi + 1;
        cell.cell_key = (zeta_key << 42) ^
                        (static_cast<std::uint64_t>(ni + 1) << 21) ^
                        static_cast<std::uint64_t>(xj + 1);
        cell.threads = grid.threads;

        const CellResult res = run_cell(cell);

        RejectionRow row;
        row.loss = grid.loss;
        row.xi = cell.xi;
        row.zeta = zeta;
        row.n = cell.n;
        row.reps = res.reps;
        row.reject_freq = res.reject_freq;
        row.mc_se = res.mc_se;
        row.errored = res.errored;
        if (grid.loss == LossKind::SquaredError) {
          SimParams cellp = grid.base;
          cellp.n = cell.n;
          cellp.xi = cell.xi;
          cellp.sigma_hat2 = snr_to_sigma_hat2(zeta, grid.base);
          const ClosedFormOmega cf = omega_closed_form(cellp);
          if (!cf.degenerate) {
            const auto delta = delta_local(LossKind::SquaredError, cellp);
            row.alp =
                asymptotic_local_power(delta, cf.omega, grid.tau).alp;
          }
        }
        if (progress) progress(row);
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

void emit_table(const RejectionTable& table, TableFormat format,
                std::ostream& out) {
  if (table.rows.empty()) throw ArgumentError("emit_table: empty table");
  if (format == TableFormat::Csv) {
    out << "loss,xi,zeta,n,reps,reject_freq,mc_se,alp\n";
    for (const auto& row : table.rows) {
      out << loss_name(row.loss) << ',' << format_double(row.xi) << ',';
      if (row.zeta.is_infinite())
        out << "inf";
      else
        out << format_double(row.zeta.value());
      out << ',' << row.n << ',' << row.reps << ','
          << format_double(row.reject_freq) << ',' << format_double(row.mc_se)
          << ',';
      if (row.alp) out << format_double(*row.alp);
      out << '\n';
    }
    return;
  }

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json j;
    j["loss"] = loss_name(row.loss);
    j["xi"] = row.xi;
    if (row.zeta.is_infinite())
      j["zeta"] = "inf";
    else
      j["zeta"] = row.zeta.value();
    j["n"] = row.n;
    j["reps"] = row.reps;
    j["reject_freq"] = row.reject_freq;
    j["mc_se"] = row.mc_se;
    if (row.alp)
      j["alp"] = *row.alp;
    else
      j["alp"] = nullptr;
    rows.push_back(std::move(j));
  }
  out << rows.dump(2) << '\n';
}

RejectionTable parse_table_json(const std::string& text) {
  nlohmann::json rows;
  try {
    rows = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid table JSON: ") + e.what());
  }
  if (!rows.is_array()) throw DataError("table JSON must be an array");

  RejectionTable table;
  for (const auto& j : rows) {
    RejectionRow row;
    row.loss = loss_from_name(j.at("loss").get<std::string>());
    row.xi = j.at("xi").get<double>();
    const auto& zeta = j.at("zeta");
    if (zeta.is_string()) {
      if (zeta.get<std::string>() != "inf")
        throw DataError("zeta must be a number or \"inf\"");
      row.zeta = Snr::infinity();
    } else {
      row.zeta = Snr::finite(zeta.get<double>());
    }
    row.n = j.at("n").get<std::size_t>();
    row.reps = j.at("reps").get<std::size_t>();
    row.reject_freq = j.at("reject_freq").get<double>();
    row.mc_se = j.at("mc_se").get<double>();
    if (j.contains("alp") && !j.at("alp").is_null())
      row.alp = j.at("alp").get<double>();
    table.rows.push_back(std::move(row));
  }
  return table;
}

ProxyVarianceReport proxy_variance_decomposition_check(
    const std::vector<DgpDraw>& draws, const BregmanSpec& loss) {
  if (draws.size() < 30)
    throw ArgumentError(
        "proxy_variance_decomposition_check: need at least 30 draws for a "
        "meaningful tolerance");

  const std::size_t reps = draws.size();
  std::vector<std::array<double, 2>> u(reps), v(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const DgpDraw& d = draws[r];
    const std::size_t m = d.y_hat.size();
    if (m < 2)
      throw ArgumentError(
          "proxy_variance_decomposition_check: paths need >= 2 observations");
    const double root_n = std::sqrt(static_cast<double>(m - 1));
    std::array<double, 2> su{0.0, 0.0}, sv{0.0, 0.0};
    for (std::size_t t = 1; t < m; ++t) {
      const double h0 = 1.0, h1 = d.y_hat[t - 1];
      const double d_proxy =
          loss_difference(loss, d.y_hat[t], d.x1[t], d.x2[t]);
      const double d_star =
          loss_difference(loss, d.x_star[t], d.x1[t], d.x2[t]);
      su[0] += h0 * d_proxy;
      su[1] += h1 * d_proxy;
      sv[0] += h0 * d_star;
      sv[1] += h1 * d_star;
    }
    u[r] = {su[0] / root_n, su[1] / root_n};
    v[r] = {sv[0] / root_n, sv[1] / root_n};
  }

  auto covariance = [&](const std::vector<std::array<double, 2>>& s) {
    std::array<double, 2> mean{0.0, 0.0};
    for (const auto& x : s) {
      mean[0] += x[0];
      mean[1] += x[1];
    }
    mean[0] /= static_cast<double>(reps);
    mean[1] /= static_cast<double>(reps);
    CovMatrix c(2);
    for (const auto& x : s)
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
          c(i, j) += (x[i] - mean[i]) * (x[j] - mean[j]);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        c(i, j) /= static_cast<double>(reps - 1);
    return c;
  };

  ProxyVarianceReport report;
  report.draws = reps;
  report.omega_proxy = covariance(u);
  report.omega_target = covariance(v);

  CovMatrix diff(2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      diff(i, j) = report.omega_proxy(i, j) - report.omega_target(i, j);
  report.min_eigenvalue = diff.eigenvalues().front();

  // Entrywise MC error of the difference from the paired per-draw products.
  double worst_se = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double mean = 0.0;
      for (std::size_t r = 0; r < reps; ++r)
        mean += u[r][i] * u[r][j] - v[r][i] * v[r][j];
      mean /= static_cast<double>(reps);
      double var = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double w = u[r][i] * u[r][j] - v[r][i] * v[r][j] - mean;
        var += w * w;
      }
      var /= static_cast<double>(reps - 1);
      worst_se = std::max(worst_se, std::sqrt(var / static_cast<double>(reps)));
    }
  report.mc_tolerance = 3.0 * worst_se;
  report.within_tolerance = report.min_eigenvalue >= -report.mc_tolerance;
  return report;
}

}  // namespace ecpa
