#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "eclat/config.hpp"
#include "eclat/errors.hpp"
#include "eclat/harness.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kInfeasible = 3, kNumerical = 4 };

int exit_code(const eclat::Error& e) {
  switch (e.category()) {
    case eclat::ErrorCategory::kConfig:
      return kConfig;
    case eclat::ErrorCategory::kInfeasible:
      return kInfeasible;
    case eclat::ErrorCategory::kNumerical:
      return kNumerical;
  }
  return kNumerical;
}

struct Args {
  std::string config;
  std::string out = ".";
  std::string design;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> intra_residual;
  bool records = false;
};

void add_common(CLI::App* cmd, Args& args) {
  cmd->add_option("--config", args.config, "experiment config (JSON)")->required();
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--seed", args.seed, "seed for the optimizer and simulator");
  cmd->add_option("--mode", args.mode, "simulated latency metric")
      ->check(CLI::IsMember({"waiting", "sojourn"}));
  cmd->add_option("--intra-residual", args.intra_residual, "residual ToR bandwidth rule")
      ->check(CLI::IsMember({"as-written", "sum"}));
}

void print_summary(const eclat::RunReport& report) {
  std::cout << "config_digest " << eclat::hex_digest(report.config_digest) << " seed " << report.seed
            << "\n";
  if (report.trace) {
    std::cout << "objective " << eclat::format_double(report.trace->objective.back()) << " after "
              << report.trace->iterations.size() << " iterations (" << report.trace->termination_reason
              << ")\n";
  }
  if (report.validation) {
    for (const auto& c : report.validation->classes) {
      std::cout << "class " << c.class_id << " bound " << eclat::format_double(c.bound) << " simulated "
                << eclat::format_double(c.empirical_mean) << " +- " << eclat::format_double(c.half_width)
                << (c.holds ? "" : "  (bound violated)") << "\n";
    }
  } else if (report.sim) {
    for (std::size_t d = 0; d < report.sim->classes.size(); ++d) {
      const auto& c = report.sim->classes[d];
      std::cout << "class " << d << " simulated " << eclat::format_double(c.mean_latency) << " +- "
                << eclat::format_double(c.half_width) << " over " << c.requests << " requests\n";
    }
  }
  if (report.sim) {
    for (const auto& w : report.sim->warnings) std::cerr << "warning: " << w << "\n";
  }
  if (report.validation) {
    for (const auto& w : report.validation->sim.warnings) std::cerr << "warning: " << w << "\n";
  }
  for (const auto& path : report.written) std::cout << "wrote " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency-optimal chunk placement, scheduling and bandwidth weights for erasure-coded storage"};
  app.require_subcommand(1);
  Args args;
  auto* optimize = app.add_subcommand("optimize", "run the alternating optimizer and save the design");
  auto* simulate = app.add_subcommand("simulate", "replay a saved design through the simulator");
  auto* validate = app.add_subcommand("validate", "optimize, simulate and compare bound with simulation");
  auto* sweep = app.add_subcommand("sweep", "validate at every value of the configured sweep");
  for (auto* cmd : {optimize, simulate, validate, sweep}) add_common(cmd, args);
  simulate->add_option("--design", args.design, "design file written by optimize")->required();
  for (auto* cmd : {simulate, validate}) {
    cmd->add_flag("--records", args.records, "also write per-request latency records");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Bad flags are configuration errors too.
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    eclat::ConfigOverrides overrides;
    overrides.seed = args.seed;
    overrides.metrics_mode = args.mode;
    overrides.intra_residual = args.intra_residual;
    const eclat::ExperimentConfig cfg = eclat::load_config(args.config, overrides);
    eclat::RunOptions opts;
    opts.out_dir = args.out;
    opts.write_records = args.records;

    eclat::RunReport report;
    if (*optimize) {
      report = eclat::run_optimize(cfg, opts);
    } else if (*simulate) {
      report = eclat::run_simulate(cfg, args.design, opts);
    } else if (*validate) {
      report = eclat::run_validate(cfg, opts);
    } else {
      report = eclat::run_sweep(cfg, opts);
    }
    print_summary(report);
    return kOk;
  } catch (const eclat::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}
