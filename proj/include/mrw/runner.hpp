// Command dispatch for the experiment harness.
#ifndef MRW_RUNNER_HPP
#define MRW_RUNNER_HPP

#include "mrw/config.hpp"

#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

namespace mrw::app {

inline constexpr std::string_view kToolVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitOutOfTolerance = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitIo = 4;

struct RunOptions {
  std::optional<std::uint64_t> seed;         // overrides the config seed
  std::optional<std::filesystem::path> out;  // overrides the config output directory
};

struct RunResult {
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> outputs;  // result files, manifest excluded
  io::Json summary;                            // the report document
};

// Executes one command and writes its CSV, JSON report and manifest.json into
// the output directory. Progress goes to `log`, never into result files.
RunResult run(Command command, const ExperimentConfig& config, const RunOptions& options,
              std::ostream& log);

// Loads two report documents and checks their "values" against `tolerance`.
bool compare(const std::filesystem::path& a, const std::filesystem::path& b, double tolerance);

// Exit status for an exception thrown by parsing, running or comparing:
// 2 config, 3 domain precondition or schema mismatch, 4 io.
int exit_code_for(const std::exception_ptr& error);

}  // namespace mrw::app

#endif  // MRW_RUNNER_HPP
