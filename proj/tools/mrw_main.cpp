// mrw <command> --config <path> [--seed N] [--out <dir>]
// mrw compare <report_a> <report_b> [--tolerance T]
#include "mrw/runner.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (...) {
    const auto error = std::current_exception();
    try {
      std::rethrow_exception(error);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
    } catch (...) {
      std::cerr << "error: unknown failure\n";
    }
    return mrw::app::exit_code_for(error);
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mrw::app;
  CLI::App app{"Markov-switched Rescorla-Wagner simulation and analysis"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  struct RunArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
  };
  std::vector<std::pair<Command, RunArgs>> run_args;
  run_args.reserve(8);
  const std::pair<Command, const char*> commands[] = {
      {Command::simulate, "Forward trajectories"},
      {Command::backward, "Backward process along reversed-chain paths"},
      {Command::stability, "Expected log-norm of mode products"},
      {Command::lyapunov, "Top Lyapunov exponent estimate"},
      {Command::ergodic, "Time average against the stationary mean"},
      {Command::mean, "Stationary mean from the moment closure"},
      {Command::distribution, "Forward vs backward KS distance"},
      {Command::prop1, "KS distances across initial mode distributions"}};
  for (const auto& [command, help] : commands) {
    auto& [cmd, args] = run_args.emplace_back(command, RunArgs{});
    auto* sub = app.add_subcommand(std::string(to_string(command)), help);
    sub->add_option("--config", args.config, "Configuration document (JSON)")->required();
    sub->add_option("--seed", args.seed, "Override the configured seed");
    sub->add_option("--out", args.out, "Output directory");
  }

  std::string report_a, report_b;
  double tolerance = 0.0;
  auto* compare_cmd = app.add_subcommand("compare", "Compare two report documents");
  compare_cmd->add_option("report_a", report_a)->required();
  compare_cmd->add_option("report_b", report_b)->required();
  compare_cmd->add_option("--tolerance", tolerance, "Absolute tolerance")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (compare_cmd->parsed()) {
    return guarded([&] {
      const bool ok = compare(report_a, report_b, tolerance);
      std::cerr << (ok ? "reports agree\n" : "reports differ beyond tolerance\n");
      return ok ? kExitOk : kExitOutOfTolerance;
    });
  }
  for (const auto& [command, args] : run_args) {
    if (!app.got_subcommand(std::string(to_string(command)))) continue;
    return guarded([&] {
      const auto config = load_config(args.config);
      RunOptions options;
      options.seed = args.seed;
      if (args.out) options.out = *args.out;
      run(command, config, options, std::cerr);
      return kExitOk;
    });
  }
  return kExitConfig;
}
