#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "crplan/cli.hpp"

namespace {

using crplan::cli::RunConfig;

// Every scalar config key is also a flag; flags override file values.
void add_config_flags(CLI::App* cmd, RunConfig& ov) {
  const auto opt_d = [cmd](const char* name, std::optional<double>& slot,
                           const char* help) {
    cmd->add_option_function<double>(
        name, [&slot](double v) { slot = v; }, help);
  };
  opt_d("--lambda01", ov.lambda01, "Weibull scale, event of interest (control)");
  opt_d("--k1", ov.k1, "Weibull shape, event of interest");
  opt_d("--lambda2", ov.lambda2, "Weibull scale, competing event");
  opt_d("--k2", ov.k2, "Weibull shape, competing event");
  opt_d("--q01", ov.q01, "P(event of interest | any event), control group");
  opt_d("--phi", ov.phi, "exponential dropout hazard");
  opt_d("--tf", ov.tf, "follow-up period");
  opt_d("--r", ov.r, "accrual period");
  opt_d("--delta0", ov.delta0, "non-inferiority margin (SDH ratio)");
  opt_d("--delta1", ov.delta1, "SDH ratio under the alternative");
  opt_d("--alpha", ov.alpha, "two-sided type I error");
  opt_d("--power", ov.power, "target power");
  opt_d("--p0", ov.p0, "allocation proportion, control");
  opt_d("--p1", ov.p1, "allocation proportion, experimental");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&ov](std::uint64_t v) { ov.seed = v; }, "RNG seed");
  cmd->add_option_function<std::int64_t>(
      "--reps,--replications", [&ov](std::int64_t v) { ov.replications = v; },
      "Monte Carlo replications");
  cmd->add_option_function<std::int64_t>(
      "--n0", [&ov](std::int64_t v) { ov.n0 = v; }, "control group size");
  cmd->add_option_function<std::int64_t>(
      "--n1", [&ov](std::int64_t v) { ov.n1 = v; }, "experimental group size");
  cmd->add_option_function<std::string>(
      "--hypothesis", [&ov](const std::string& v) { ov.hypothesis = v; },
      "data-generating hypothesis: null | alt");
}

RunConfig resolve(const std::string& config_path, const RunConfig& overrides) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = crplan::cli::load_config_file(config_path);
  crplan::cli::merge_overrides(cfg, overrides);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "crplan: sample size and Monte Carlo verification for non-inferiority "
      "trials with competing risks (proportional sub-distribution hazards)"};
  app.require_subcommand(1);
  int exit_code = crplan::cli::kExitOk;

  // size
  auto* size_cmd = app.add_subcommand(
      "size", "events and total sample size for a design");
  std::string size_config, size_out, size_mode;
  RunConfig size_ov;
  size_cmd->add_option("--config", size_config, "JSON config file");
  size_cmd->add_option("--out", size_out, "write the result as JSON");
  size_cmd->add_option("--mode", size_mode, "sdh | single-event");
  add_config_flags(size_cmd, size_ov);
  size_cmd->callback([&] {
    try {
      if (!size_mode.empty()) size_ov.mode = size_mode;
      exit_code = crplan::cli::cmd_size(resolve(size_config, size_ov),
                                        std::cout, std::cerr, size_out);
    } catch (const crplan::cli::io_error& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = crplan::cli::kExitIo;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = crplan::cli::kExitConfig;
    }
  });

  // reproduce-table2
  auto* table2_cmd = app.add_subcommand(
      "reproduce-table2",
      "sample sizes for the worked prostate-cancer example grid");
  std::string table2_out;
  table2_cmd->add_option("--out", table2_out, "write the CSV to a file");
  table2_cmd->callback([&] {
    exit_code = crplan::cli::cmd_reproduce_table2(std::cout, std::cerr,
                                                  table2_out);
  });

  // simulate
  auto* sim_cmd = app.add_subcommand(
      "simulate", "generate a competing-risks trial dataset as CSV");
  std::string sim_config, sim_out;
  bool sim_oracle = false;
  RunConfig sim_ov;
  sim_cmd->add_option("--config", sim_config, "JSON config file");
  sim_cmd->add_option("--out", sim_out, "output CSV path")->required();
  sim_cmd->add_flag("--oracle", sim_oracle,
                    "emit the generated censor_time column");
  add_config_flags(sim_cmd, sim_ov);
  sim_cmd->callback([&] {
    try {
      exit_code = crplan::cli::cmd_simulate(resolve(sim_config, sim_ov),
                                            sim_out, sim_oracle, std::cout,
                                            std::cerr);
    } catch (const crplan::cli::io_error& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = crplan::cli::kExitIo;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = crplan::cli::kExitConfig;
    }
  });

  // fit
  auto* fit_cmd = app.add_subcommand(
      "fit", "two-group Fine-Gray fit and non-inferiority verdict");
  std::string fit_data, fit_config, fit_out;
  bool fit_oracle = false;
  RunConfig fit_ov;
  fit_cmd->add_option("dataset", fit_data, "dataset CSV path")->required();
  fit_cmd->add_option("--config", fit_config, "JSON config file");
  fit_cmd->add_option("--out", fit_out, "write the fit as JSON");
  fit_cmd->add_flag("--oracle", fit_oracle,
                    "use recorded censoring times instead of IPCW weights");
  add_config_flags(fit_cmd, fit_ov);
  fit_cmd->callback([&] {
    try {
      exit_code = crplan::cli::cmd_fit(fit_data, resolve(fit_config, fit_ov),
                                       fit_oracle, std::cout, std::cerr,
                                       fit_out);
    } catch (const crplan::cli::io_error& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = crplan::cli::kExitIo;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = crplan::cli::kExitConfig;
    }
  });

  // power
  auto* power_cmd = app.add_subcommand(
      "power", "Monte Carlo power / type I error study");
  std::string power_config, power_out, power_plot, power_grid;
  int power_threads = std::max(1u, std::thread::hardware_concurrency());
  RunConfig power_ov;
  power_cmd->add_option("--config", power_config, "JSON config file");
  power_cmd->add_option("--out", power_out, "output CSV path")->required();
  power_cmd->add_option("--plot", power_plot, "optional SVG scatter path");
  power_cmd->add_option("--grid", power_grid,
                        "run a scenario grid; only 'table1' is defined");
  power_cmd->add_option("--threads", power_threads,
                        "worker threads (result is thread-count independent)");
  add_config_flags(power_cmd, power_ov);
  power_cmd->callback([&] {
    try {
      crplan::cli::PowerInvocation inv;
      if (!power_grid.empty() && power_grid != "table1") {
        throw std::invalid_argument("unknown grid '" + power_grid +
                                    "'; only 'table1' is defined");
      }
      inv.grid_table1 = power_grid == "table1";
      inv.config = resolve(power_config, power_ov);
      inv.out_csv = power_out;
      inv.plot_path = power_plot;
      inv.threads = power_threads;
      exit_code = crplan::cli::cmd_power(inv, std::cout, std::cerr);
    } catch (const crplan::cli::io_error& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = crplan::cli::kExitIo;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = crplan::cli::kExitConfig;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return crplan::cli::kExitConfig;
  }
  return exit_code;
}
