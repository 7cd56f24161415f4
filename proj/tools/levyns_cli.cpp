#include <CLI11.hpp>

#include <iostream>

#include "levyns/error.hpp"
#include "levyns/harness.hpp"

using namespace levyns;

int main(int argc, char** argv) {
  CLI::App app{"levyns: Galerkin simulation and path diagnostics for Navier-Stokes with Levy noise"};
  app.require_subcommand(1, 1);

  std::string config_file, out_flag;
  std::uint64_t seed = 0;
  std::size_t level = 0;
  int workers = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* c = cmd->add_option("--config", config_file, "experiment configuration (JSON)");
    if (needs_config) c->required();
    cmd->add_option("--out", out_flag, "output directory (default: $LEVYNS_OUTPUT_ROOT/<hash> or run.output)");
    cmd->add_option("--seed", seed, "override run.seed");
    cmd->add_option("--workers", workers, "OpenMP worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--level", level, "restrict to one Galerkin level");
  };
  auto* validate = app.add_subcommand("validate", "check the basis and the noise assumptions");
  auto* simulate = app.add_subcommand("simulate", "simulate one ensemble per level");
  auto* analyze = app.add_subcommand("analyze", "moment, tightness and Aldous diagnostics");
  auto* report = app.add_subcommand("report", "summary and CSV bundle of report.json");
  add_common(validate, true);
  add_common(simulate, true);
  add_common(analyze, true);
  add_common(report, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    RunOptions opt;
    for (auto* cmd : {validate, simulate, analyze, report}) {
      if (!app.got_subcommand(cmd)) continue;
      if (cmd->count("--seed")) opt.seed = seed;
      if (cmd->count("--level")) opt.level = level;
    }
    opt.workers = workers;

    if (app.got_subcommand(report)) {
      std::filesystem::path out = out_flag;
      if (out.empty()) {
        if (config_file.empty()) throw IngestionError("report needs --out or --config");
        out = resolve_output(ExperimentConfig::load(config_file), "");
      }
      cmd_report(out, std::cout);
      return 0;
    }

    ExperimentConfig cfg = ExperimentConfig::load(config_file);
    if (opt.seed) cfg.run.seed = *opt.seed;
    if (app.got_subcommand(validate)) {
      const auto audits = cmd_validate(cfg, std::cout);
      return audits_passed(audits) ? 0 : static_cast<int>(ExitCode::assumption_failure);
    }
    const auto out = resolve_output(cfg, out_flag);
    if (app.got_subcommand(simulate)) {
      const auto res = cmd_simulate(cfg, out, opt, std::cout);
      std::cout << "config hash " << cfg.hash() << '\n';
      return res.failures == 0 ? 0 : static_cast<int>(ExitCode::integration_failure);
    }
    const auto rep = cmd_analyze(cfg, out, opt, std::cout);
    write_summary(std::cout, rep);
    return 0;
  } catch (const Error& e) {
    std::cerr << "levyns: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "levyns: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  }
}
