// Command-line front end: panel tests, proxy unbiasedness checks, local
// power curves, simulation grids, and quantile-DLD diagnostics.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecpa/distribution.hpp"
#include "ecpa/ecpa_test.hpp"
#include "ecpa/errors.hpp"
#include "ecpa/io.hpp"
#include "ecpa/loss.hpp"
#include "ecpa/power.hpp"
#include "ecpa/sim.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

ordered_json matrix_json(const ecpa::CovMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json result_json(const ecpa::EcpaResult& r) {
  ordered_json j;
  j["statistic"] = r.statistic;
  j["df"] = r.df;
  j["p_value"] = r.p_value;
  j["n_effective"] = r.n_effective;
  j["mean_moment"] = r.mean_moment;
  j["covariance"] = matrix_json(r.covariance);
  j["cov_method"] = r.cov_method;
  j["psd_repaired"] = r.psd_repaired;
  return j;
}

struct CommonOptions {
  std::string config_path;
  std::string loss = "se";
  double alpha = 0.5;
  std::string instruments;
  long bandwidth = -1;  // -1 = auto (horizon - 1)
  std::string weights = "bartlett";
  int horizon = 1;
  double tau = 0.05;
  std::uint64_t seed = 42;
  long lag = -1;  // default instrument lag override; -1 = horizon

  bool loss_set = false, alpha_set = false, instruments_set = false,
       weights_set = false, horizon_set = false, tau_set = false,
       seed_set = false, bandwidth_set = false;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path,
                  "Run configuration file (flat key = value)");
  cmd->add_option("--loss", opt.loss, "Loss family: se, qlike or quantile")
      ->check(CLI::IsMember({"se", "qlike", "quantile"}))
      ->each([&opt](const std::string&) { opt.loss_set = true; });
  cmd->add_option("--alpha", opt.alpha, "Quantile level for --loss quantile")
      ->each([&opt](const std::string&) { opt.alpha_set = true; });
  cmd->add_option("--instruments", opt.instruments,
                  "Instrument list, e.g. 'constant,proxy(1)'")
      ->each([&opt](const std::string&) { opt.instruments_set = true; });
  cmd->add_option("--bandwidth", opt.bandwidth,
                  "HAC bandwidth (default: horizon - 1)")
      ->each([&opt](const std::string&) { opt.bandwidth_set = true; });
  cmd->add_option("--weights", opt.weights, "HAC weights: bartlett or uniform")
      ->check(CLI::IsMember({"bartlett", "uniform"}))
      ->each([&opt](const std::string&) { opt.weights_set = true; });
  cmd->add_option("--horizon", opt.horizon, "Forecast horizon (>= 1)")
      ->each([&opt](const std::string&) { opt.horizon_set = true; });
  cmd->add_option("--tau", opt.tau, "Significance level in (0, 1)")
      ->each([&opt](const std::string&) { opt.tau_set = true; });
  cmd->add_option("--seed", opt.seed, "Random seed")
      ->each([&opt](const std::string&) { opt.seed_set = true; });
  cmd->add_option("--lag", opt.lag,
                  "Default instrument lag (overrides the horizon rule)");
}

// Flags win over the config file; the config wins over built-in defaults.
void merge_config(CommonOptions& opt) {
  ecpa::RunConfig cfg;
  if (!opt.config_path.empty())
    cfg = ecpa::RunConfig::load_file(opt.config_path);
  if (!opt.loss_set) opt.loss = cfg.str("loss.kind");
  if (!opt.alpha_set) opt.alpha = cfg.num("loss.alpha");
  if (!opt.instruments_set) opt.instruments = cfg.str("instruments");
  if (!opt.weights_set) opt.weights = cfg.str("covariance.weights");
  if (!opt.horizon_set) opt.horizon = static_cast<int>(cfg.integer("horizon"));
  if (!opt.tau_set) opt.tau = cfg.num("tau");
  if (!opt.seed_set) opt.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  if (!opt.bandwidth_set) {
    const std::string b = cfg.str("covariance.bandwidth");
    if (b == "auto")
      opt.bandwidth = -1;
    else
      opt.bandwidth =
          static_cast<long>(ecpa::parse_number(b, "covariance.bandwidth"));
  }
}

ecpa::HacConfig hac_from_options(const CommonOptions& opt) {
  ecpa::HacConfig cfg = ecpa::default_hac_for_horizon(opt.horizon);
  if (opt.bandwidth >= 0)
    cfg.bandwidth = static_cast<std::size_t>(opt.bandwidth);
  cfg.weights = opt.weights == "uniform" ? ecpa::HacConfig::Weights::Uniform
                                         : ecpa::HacConfig::Weights::Bartlett;
  return cfg;
}

ordered_json settings_json(const CommonOptions& opt,
                           const ecpa::HacConfig& cov) {
  ordered_json s;
  s["loss"] = opt.loss;
  if (opt.loss == "quantile") s["alpha"] = opt.alpha;
  s["instruments"] = opt.instruments;
  s["bandwidth"] = cov.bandwidth;
  s["weights"] = opt.weights;
  s["horizon"] = opt.horizon;
  s["tau"] = opt.tau;
  return s;
}

int cmd_test(const std::string& panel_path, CommonOptions opt) {
  merge_config(opt);
  if (!(opt.tau > 0.0 && opt.tau < 1.0))
    throw ecpa::ArgumentError("--tau must lie in (0, 1)");
  if (opt.horizon < 1) throw ecpa::ArgumentError("--horizon must be >= 1");
  const ecpa::EvaluationPanel panel =
      ecpa::load_panel_file(panel_path, opt.horizon);
  const std::size_t default_lag =
      opt.lag >= 1 ? static_cast<std::size_t>(opt.lag)
                   : static_cast<std::size_t>(opt.horizon);
  const ecpa::InstrumentSpec instruments =
      ecpa::parse_instruments(opt.instruments, default_lag);
  const ecpa::HacConfig cov = hac_from_options(opt);

  ecpa::EcpaResult result;
  if (opt.loss == "se") {
    result = ecpa::ecpa_statistic(panel, ecpa::squared_error_loss(1),
                                  instruments, cov);
  } else if (opt.loss == "qlike") {
    result = ecpa::ecpa_statistic(panel, ecpa::qlike_loss(1), instruments, cov);
  } else {
    result = ecpa::ecpa_statistic(panel, ecpa::pinball_loss(opt.alpha),
                                  instruments, cov);
  }

  ordered_json j = result_json(result);
  j["reject_at_tau"] = result.p_value < opt.tau;
  j["settings"] = settings_json(opt, cov);
  j["settings"]["panel"] = panel_path;
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_proxy_check(const std::string& csv_path, const std::string& col_a,
                    const std::string& col_b, const std::string& preset,
                    CommonOptions opt) {
  merge_config(opt);
  const ecpa::CsvColumns csv = ecpa::load_numeric_csv_file(csv_path);
  const auto find = [&](const std::string& name) -> const std::vector<double>& {
    const auto it = csv.columns.find(name);
    if (it == csv.columns.end())
      throw ecpa::DataError("CSV has no column '" + name + "'");
    return it->second;
  };
  const auto& a = find(col_a);
  const auto& b = find(col_b);

  const auto presets = ecpa::instrument_presets_proxycheck();
  ordered_json results = ordered_json::array();

  auto run_one = [&](std::size_t index, const ecpa::InstrumentSpec& spec) {
    ecpa::EcpaResult r = ecpa::proxy_unbiasedness_test(a, b, spec);
    ordered_json j;
    j["preset"] = index + 1;
    std::ostringstream names;
    for (std::size_t k = 0; k < spec.size(); ++k)
      names << (k ? "," : "") << spec[k].describe();
    j["instruments"] = names.str();
    j["df"] = r.df;
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value;
    results.push_back(std::move(j));
  };

  if (preset == "all") {
    for (std::size_t i = 0; i < presets.size(); ++i) run_one(i, presets[i]);
  } else if (preset == "custom") {
    if (!opt.instruments_set)
      throw ecpa::ArgumentError(
          "--preset custom requires --instruments; presets 1-5 otherwise");
    const std::size_t default_lag =
        opt.lag >= 1 ? static_cast<std::size_t>(opt.lag) : 1;
    ecpa::EcpaResult r = ecpa::proxy_unbiasedness_test(
        a, b, ecpa::parse_instruments(opt.instruments, default_lag));
    ordered_json j;
    j["preset"] = "custom";
    j["instruments"] = opt.instruments;
    j["df"] = r.df;
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value;
    results.push_back(std::move(j));
  } else {
    std::size_t index = 0;
    try {
      index = static_cast<std::size_t>(std::stoul(preset));
    } catch (...) {
      throw ecpa::ArgumentError("--preset must be 1-5, 'all' or 'custom'");
    }
    if (index < 1 || index > presets.size())
      throw ecpa::ArgumentError("--preset must be 1-5, 'all' or 'custom'");
    run_one(index - 1, presets[index - 1]);
  }

  ordered_json j;
  j["file"] = csv_path;
  j["col_a"] = col_a;
  j["col_b"] = col_b;
  j["n"] = a.size();
  j["results"] = std::move(results);
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_power(double mu, double phi, double sigma_eps2, const std::string& zeta,
              double xi, double tau, const std::string& loss, bool want_alp) {
  ecpa::SimParams params;
  params.mu = mu;
  params.ar_coeff = phi;
  params.sigma_eps2 = sigma_eps2;
  params.xi = xi;
  params.n = 1;
  const ecpa::Snr snr = ecpa::parse_snr(zeta);
  params.sigma_hat2 = ecpa::snr_to_sigma_hat2(snr, params);

  ordered_json j;
  j["loss"] = loss;
  j["mu"] = mu;
  j["phi"] = phi;
  j["sigma_eps2"] = sigma_eps2;
  if (snr.is_infinite())
    j["zeta"] = "inf";
  else
    j["zeta"] = snr.value();
  j["sigma_hat2"] = params.sigma_hat2;
  j["xi"] = xi;
  j["tau"] = tau;

  if (loss == "se") {
    const auto delta = ecpa::delta_local(ecpa::LossKind::SquaredError, params);
    const auto omega = ecpa::omega_closed_form(params);
    if (omega.degenerate)
      throw ecpa::SingularityError(
          "closed-form moment covariance is degenerate (mu = 0); no local "
          "power curve exists for this design");
    const auto power = ecpa::asymptotic_local_power(delta, omega.omega, tau);
    j["delta"] = power.delta;
    j["omega"] = matrix_json(power.omega);
    j["lambda"] = power.noncentrality;
    j["alp"] = power.alp;
  } else {
    if (want_alp)
      throw ecpa::ArgumentError(
          "asymptotic local power is only available for --loss se: the "
          "absolute-error design has no closed-form moment covariance, so "
          "this tool reports expected loss differences instead");
    const auto delta = ecpa::delta_local(ecpa::LossKind::AbsoluteError, params);
    const double root = ecpa::ae_null_sigma1(params);
    j["delta"] = std::vector<double>{delta[0], delta[1]};
    j["sigma1_sq_null"] = root;
    j["expected_loss_diff_target"] =
        ecpa::expected_ae_loss_diff(params, root, false);
    j["expected_loss_diff_proxy"] =
        ecpa::expected_ae_loss_diff(params, root, true);
  }
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_simulate(CommonOptions opt, const std::string& out_path,
                 const std::string& format, long reps_override,
                 unsigned threads) {
  ecpa::RunConfig cfg;
  if (!opt.config_path.empty())
    cfg = ecpa::RunConfig::load_file(opt.config_path);

  ecpa::ExperimentGrid grid;
  grid.xi_grid = cfg.num_list("grid.xi");
  grid.zeta_grid = cfg.snr_list("grid.zeta");
  for (const double n : cfg.num_list("grid.n")) {
    if (!(n >= 2) || n != static_cast<double>(static_cast<std::size_t>(n)))
      throw ecpa::DataError("grid.n entries must be integers >= 2");
    grid.n_grid.push_back(static_cast<std::size_t>(n));
  }
  grid.reps = static_cast<std::size_t>(cfg.integer("grid.reps"));
  if (reps_override > 0) grid.reps = static_cast<std::size_t>(reps_override);
  grid.tau = opt.tau_set ? opt.tau : cfg.num("tau");
  grid.seed = opt.seed_set ? opt.seed
                           : static_cast<std::uint64_t>(cfg.integer("seed"));
  const std::string loss = cfg.str("grid.loss");
  if (loss == "se")
    grid.loss = ecpa::LossKind::SquaredError;
  else if (loss == "ae")
    grid.loss = ecpa::LossKind::AbsoluteError;
  else
    throw ecpa::DataError("grid.loss must be 'se' or 'ae'");
  grid.base.mu = cfg.num("grid.mu");
  grid.base.ar_coeff = cfg.num("grid.phi");
  grid.base.sigma_eps2 = cfg.num("grid.sigma_eps2");
  grid.common_random_numbers = cfg.flag("grid.common_random_numbers");
  grid.threads = threads;

  const auto started = std::chrono::steady_clock::now();
  const ecpa::RejectionTable table =
      ecpa::run_grid(grid, [&](const ecpa::RejectionRow& row) {
        std::ostringstream zeta;
        if (row.zeta.is_infinite())
          zeta << "inf";
        else
          zeta << row.zeta.value();
        const auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
        std::cerr << "[simulate] zeta=" << zeta.str() << " n=" << row.n
                  << " xi=" << row.xi << " reject=" << row.reject_freq
                  << " (t+" << elapsed << "s)\n";
      });

  const ecpa::TableFormat fmt =
      format == "json" ? ecpa::TableFormat::Json : ecpa::TableFormat::Csv;
  if (out_path.empty() || out_path == "-") {
    ecpa::emit_table(table, fmt, std::cout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
      throw ecpa::DataError("cannot open output file '" + out_path + "'");
    ecpa::emit_table(table, fmt, out);
    out.flush();
    if (!out) throw ecpa::DataError("failed writing '" + out_path + "'");
  }
  return kExitOk;
}

ecpa::Distribution parse_distribution(const std::string& text, double lo,
                                      double hi) {
  const std::size_t colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind != "gaussian")
    throw ecpa::ArgumentError("unsupported distribution kind '" + kind +
                              "' (supported: gaussian:<mean>,<variance>)");
  if (colon == std::string::npos)
    throw ecpa::ArgumentError("expected gaussian:<mean>,<variance>");
  const auto params =
      ecpa::parse_number_list(text.substr(colon + 1), "distribution");
  if (params.size() != 2)
    throw ecpa::ArgumentError("expected gaussian:<mean>,<variance>");
  return ecpa::Distribution::gaussian(params[0], params[1], lo, hi);
}

int cmd_dld(const std::string& f_text, const std::string& fhat_text,
            const std::string& support, double x1, double x2, double alpha,
            const std::string& g_name) {
  const auto bounds = ecpa::parse_number_list(support, "--support");
  if (bounds.size() != 2 || !(bounds[0] < bounds[1]))
    throw ecpa::ArgumentError("--support must be 'lo,hi' with lo < hi");
  if (g_name != "id")
    throw ecpa::ArgumentError("unsupported g selector '" + g_name +
                              "' (supported: id)");
  const auto f = parse_distribution(f_text, bounds[0], bounds[1]);
  const auto fhat = parse_distribution(fhat_text, bounds[0], bounds[1]);
  const auto spec = ecpa::pinball_loss(alpha, bounds[0], bounds[1]);
  ecpa::validate_quantile_spec(spec);

  ordered_json j;
  j["f"] = f_text;
  j["fhat"] = fhat_text;
  j["support"] = bounds;
  j["x1"] = x1;
  j["x2"] = x2;
  j["alpha"] = alpha;
  j["g"] = g_name;
  j["expected_dld"] = ecpa::expected_dld_quantile(f, fhat, x1, x2, spec);
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equal-predictive-ability testing under measurement error"};
  app.require_subcommand(1);

  auto* test = app.add_subcommand("test", "Run the panel ECPA/EPA test");
  std::string panel_path;
  test->add_option("panel", panel_path, "Panel CSV")->required();
  CommonOptions test_opt;
  add_common_flags(test, test_opt);

  auto* proxy = app.add_subcommand(
      "proxy-check", "Conditional-unbiasedness test for a proxy pair");
  std::string proxy_path, col_a, col_b, preset = "all";
  proxy->add_option("csv", proxy_path, "CSV with the proxy columns")
      ->required();
  proxy->add_option("--col-a", col_a, "First proxy column")->required();
  proxy->add_option("--col-b", col_b, "Second proxy column")->required();
  proxy->add_option("--preset", preset, "1-5, 'all' (default) or 'custom'");
  CommonOptions proxy_opt;
  add_common_flags(proxy, proxy_opt);

  auto* power = app.add_subcommand("power", "Analytic local power");
  double p_mu = 1.0, p_phi = 0.2, p_s2 = 1.0, p_xi = 0.0, p_tau = 0.05;
  std::string p_zeta = "inf", p_loss = "se";
  bool p_alp = false;
  power->add_option("--mu", p_mu, "Target level");
  power->add_option("--phi", p_phi, "AR coefficient (|phi| < 1)");
  power->add_option("--sigma-eps2", p_s2, "Innovation variance");
  power->add_option("--zeta", p_zeta, "Proxy SNR (number or 'inf')");
  power->add_option("--xi", p_xi, "Local-alternative scale");
  power->add_option("--tau", p_tau, "Significance level");
  power->add_option("--loss", p_loss, "se or ae")
      ->check(CLI::IsMember({"se", "ae"}));
  power->add_flag("--alp", p_alp, "Require the local power value");

  auto* simulate =
      app.add_subcommand("simulate", "Rejection-frequency experiment grid");
  CommonOptions sim_opt;
  std::string sim_out, sim_format = "csv";
  long sim_reps = -1;
  unsigned sim_threads = 0;
  simulate->add_option("--config", sim_opt.config_path, "Grid configuration")
      ->required();
  simulate->add_option("--out", sim_out, "Output path ('-' for stdout)");
  simulate->add_option("--format", sim_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("--reps", sim_reps, "Override grid.reps");
  simulate->add_option("--seed", sim_opt.seed, "Override seed")
      ->each([&sim_opt](const std::string&) { sim_opt.seed_set = true; });
  simulate->add_option("--tau", sim_opt.tau, "Override tau")
      ->each([&sim_opt](const std::string&) { sim_opt.tau_set = true; });
  simulate->add_option("--threads", sim_threads,
                       "Worker threads (0 = auto, capped by ECPA_THREADS)");

  auto* dld = app.add_subcommand(
      "dld", "Expected difference of quantile loss differences");
  std::string d_f = "gaussian:0,1", d_fhat = "gaussian:0,1",
              d_support = "-8,8", d_g = "id";
  double d_x1 = 0.0, d_x2 = 0.0, d_alpha = 0.5;
  dld->add_option("--f", d_f, "Target distribution (gaussian:<mean>,<var>)");
  dld->add_option("--fhat", d_fhat, "Proxy distribution");
  dld->add_option("--support", d_support, "Common support 'lo,hi'");
  dld->add_option("--x1", d_x1, "First forecast")->required();
  dld->add_option("--x2", d_x2, "Second forecast")->required();
  dld->add_option("--alpha", d_alpha, "Quantile level");
  dld->add_option("--g", d_g, "Increasing transform selector (id)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*test) return cmd_test(panel_path, test_opt);
    if (*proxy)
      return cmd_proxy_check(proxy_path, col_a, col_b, preset, proxy_opt);
    if (*power)
      return cmd_power(p_mu, p_phi, p_s2, p_zeta, p_xi, p_tau, p_loss, p_alp);
    if (*simulate)
      return cmd_simulate(sim_opt, sim_out, sim_format, sim_reps, sim_threads);
    if (*dld) return cmd_dld(d_f, d_fhat, d_support, d_x1, d_x2, d_alpha, d_g);
  } catch (const ecpa::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ecpa::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const ecpa::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
