// Experiment configuration documents and the named model presets.
#ifndef MRW_CONFIG_HPP
#define MRW_CONFIG_HPP

#include "mrw/analysis.hpp"
#include "mrw/dynamics.hpp"
#include "mrw/io.hpp"
#include "mrw/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mrw::app {

enum class Command { simulate, backward, stability, lyapunov, ergodic, mean, distribution, prop1 };

std::optional<Command> command_from_string(std::string_view name);
std::string_view to_string(Command c);

enum class StabilityMethod { exact, monte_carlo, automatic };

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { parse, validation };

  ConfigError(Kind kind, std::string field, const std::string& what, std::size_t line = 0)
      : std::runtime_error(describe(kind, field, what, line)),
        kind_(kind),
        field_(std::move(field)),
        line_(line) {}

  Kind kind() const noexcept { return kind_; }
  // Leaf key of the offending field, e.g. "alpha".
  const std::string& field() const noexcept { return field_; }
  // 1-based line for parse errors, 0 otherwise.
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string describe(Kind kind, const std::string& field, const std::string& what,
                              std::size_t line);

  Kind kind_;
  std::string field_;
  std::size_t line_;
};

struct Model {
  std::string name;  // preset name, or "inline"
  std::optional<ModeSystem<double>> modes;
  AffineSystem<double> affine;
};

struct ExperimentConfig {
  io::Json document;
  std::optional<Command> command;
  Model model;
  InitialLaw<double> init = InitialLaw<double>::point(Vector<double>::Zero(1));
  std::size_t horizon = 100;
  std::size_t n_traj = 1;
  std::size_t n_samples = 100'000;
  std::size_t n_steps = 100'000;
  std::optional<Index> k;
  std::optional<Index> k_max;
  StabilityMethod method = StabilityMethod::automatic;
  Norm norm = Norm::two;
  std::uint64_t seed = 0;
  bool seed_defaulted = true;
  std::vector<std::size_t> snapshots;
  std::vector<Distribution<double>> init_dists;
  std::filesystem::path output = "out";
};

// Parses and validates a JSON configuration document. Unknown keys are
// rejected; a missing seed defaults to 0 and is flagged.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Names accepted by the "preset" key.
const std::vector<std::string>& preset_names();

// Builds a named preset from its parameter object (defaults fill missing
// keys). Throws ConfigError naming the offending parameter.
Model make_preset(const std::string& name, const io::Json& params = io::Json::object());

}  // namespace mrw::app

#endif  // MRW_CONFIG_HPP
