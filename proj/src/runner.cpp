#include "mrw/runner.hpp"

#include <chrono>
#include <ctime>
#include <sstream>

namespace mrw::app {

namespace {

using io::Json;
namespace fs = std::filesystem;

class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw io::IoError("cannot create " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& contents) {
    const fs::path path = dir_ / name;
    io::write_file_atomic(path, contents);
    files_.push_back(path);
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<fs::path>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Index require_k(const ExperimentConfig& cfg) {
  if (!cfg.k && !cfg.k_max) throw ConfigError(ConfigError::Kind::validation, "k", "k or k_max is required");
  return cfg.k.value_or(0);
}

StabilityReport<double> stability_at(const ExperimentConfig& cfg, Index k, std::uint64_t seed) {
  const auto& sys = cfg.model.affine;
  switch (cfg.method) {
    case StabilityMethod::exact: return log_norm_expectation_exact(sys, k, cfg.norm);
    case StabilityMethod::monte_carlo:
      return log_norm_expectation_mc(sys, k, cfg.n_samples, seed, cfg.norm);
    case StabilityMethod::automatic: break;
  }
  try {
    return log_norm_expectation_exact(sys, k, cfg.norm);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EnumerationTooLarge) throw;
    return log_norm_expectation_mc(sys, k, cfg.n_samples, seed, cfg.norm);
  }
}

Json run_simulate(const ExperimentConfig& cfg, std::uint64_t seed, OutputSet& out, bool backward) {
  const auto& sys = cfg.model.affine;
  std::vector<Trajectory<double>> trajs;
  if (backward) {
    for (std::size_t j = 0; j < cfg.n_traj; ++j) {
      Rng rng(seed, j);
      const Vector<double> x0 = cfg.init.draw(rng);
      auto t = sample_backward_trajectory(sys, x0, cfg.horizon, rng);
      t.seed = seed;
      trajs.push_back(std::move(t));
    }
  } else {
    trajs = batch_trajectories(sys, cfg.init, cfg.horizon, cfg.n_traj, seed);
  }
  Json finals = Json::array();
  for (std::size_t j = 0; j < trajs.size(); ++j) {
    std::ostringstream csv;
    write_trajectory_csv(csv, trajs[j]);
    std::string name = "trajectory";
    if (trajs.size() > 1) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "_%03zu", j);
      name += buf;
    }
    out.write(name + ".csv", csv.str());
    finals.push_back(io::vector_to_json(trajs[j].final_state));
  }
  return io::make_report(backward ? "backward" : "simulate", {{"final_states", finals}},
                         {{"horizon", cfg.horizon}, {"n_traj", cfg.n_traj}});
}

Json run_stability(const ExperimentConfig& cfg, std::uint64_t seed, OutputSet& out) {
  std::ostringstream csv;
  io::write_stability_csv_header(csv);
  Json report;
  if (cfg.k_max && !cfg.k) {
    Json rows = Json::array();
    std::optional<Index> certified;
    for (Index k = 1; k <= *cfg.k_max; ++k) {
      const auto r = stability_at(cfg, k, seed + static_cast<std::uint64_t>(k));
      io::write_stability_csv_row(csv, r);
      rows.push_back(io::stability_report_to_json(r));
      if (r.verdict == Verdict::certified_stable) {
        certified = k;
        break;
      }
    }
    report = io::make_report("stability_search",
                             {{"first_negative_k", certified ? Json(*certified) : Json(nullptr)}},
                             {{"k_max", *cfg.k_max}, {"reports", rows}});
  } else {
    const auto r = stability_at(cfg, require_k(cfg), seed);
    io::write_stability_csv_row(csv, r);
    report = io::stability_report_to_json(r);
  }
  out.write("stability.csv", csv.str());
  return report;
}

Json run_lyapunov(const ExperimentConfig& cfg, std::uint64_t seed, OutputSet& out) {
  const double exponent = lyapunov_exponent(cfg.model.affine, cfg.n_steps, seed, cfg.norm);
  std::ostringstream csv;
  csv << "n_steps,norm,exponent\n"
      << cfg.n_steps << ',' << to_string(cfg.norm) << ',' << io::format_double(exponent) << '\n';
  out.write("lyapunov.csv", csv.str());
  return io::make_report("lyapunov", {{"exponent", exponent}},
                         {{"n_steps", cfg.n_steps}, {"norm", std::string(to_string(cfg.norm))}});
}

Json run_ergodic(const ExperimentConfig& cfg, std::uint64_t seed, OutputSet& out) {
  const auto r = ergodic_average(cfg.model.affine, cfg.init, cfg.n_steps, seed, cfg.norm);
  std::ostringstream csv;
  io::write_ergodic_csv(csv, r);
  out.write("ergodic.csv", csv.str());
  return io::ergodic_report_to_json(r);
}

Json run_mean(const ExperimentConfig& cfg, OutputSet& out) {
  const auto mean = stationary_mean(cfg.model.affine);
  std::ostringstream csv;
  csv << "coord,mean\n";
  for (Index i = 0; i < mean.size(); ++i) csv << (i + 1) << ',' << io::format_double(mean[i]) << '\n';
  out.write("mean.csv", csv.str());
  return io::make_report("mean", {{"mean", io::vector_to_json(mean)}});
}

// Forward walks from the stationary mode law against backward walks driven by
// the reversed chain, compared coordinatewise at time `horizon`.
Json run_distribution(const ExperimentConfig& cfg, std::uint64_t seed, OutputSet& out) {
  const auto& sys = cfg.model.affine;
  const auto started = sys.with_init_dist(stationary(sys.chain()));
  const std::size_t n = std::max<std::size_t>(cfg.n_traj, 2);
  const auto forward = batch_snapshots(started, cfg.init, {cfg.horizon}, n, seed).front();
  const auto backward =
      batch_backward_finals(sys, cfg.init, cfg.horizon, n, seed ^ 0xB5AD4ECEDA1CE2A9ULL);
  const double critical = ks_critical_value(n, n);
  std::ostringstream csv;
  csv << "k,coord,ks,critical\n";
  double worst = 0;
  for (Index c = 0; c < sys.dim(); ++c) {
    std::vector<double> a(n), b(n);
    for (std::size_t j = 0; j < n; ++j) {
      a[j] = forward[j][c];
      b[j] = backward[j][c];
    }
    const double d = ks_statistic(a, b);
    worst = std::max(worst, d);
    csv << cfg.horizon << ',' << (c + 1) << ',' << io::format_double(d) << ','
        << io::format_double(critical) << '\n';
  }
  out.write("distribution.csv", csv.str());
  return io::make_report("distribution", {{"distance", worst}},
                         {{"k", cfg.horizon}, {"n_traj", n}, {"critical_value", critical}});
}

Json run_prop1(const ExperimentConfig& cfg, std::uint64_t seed, OutputSet& out, std::ostream& log) {
  const auto& sys = cfg.model.affine;
  auto dists = cfg.init_dists;
  if (dists.empty()) {
    dists.push_back(stationary(sys.chain()));
    for (Index i = 0; i < sys.n_modes(); ++i)
      dists.push_back(Distribution<double>::point_mass(sys.n_modes(), i));
  }
  auto snaps = cfg.snapshots;
  if (snaps.empty()) snaps = {0, cfg.horizon};
  const auto study = proposition1_experiment(sys, cfg.init, dists, snaps, std::max<std::size_t>(cfg.n_traj, 2), seed);
  for (const auto& w : study.warnings) log << "warning: " << w << '\n';
  std::ostringstream csv;
  csv << "init_a,init_b,k,distance,critical\n";
  Json distances = Json::array();
  for (const auto& row : study.rows) {
    csv << row.init_a << ',' << row.init_b << ',' << row.k << ',' << io::format_double(row.distance)
        << ',' << io::format_double(study.critical_value) << '\n';
    distances.push_back(row.distance);
  }
  out.write("prop1.csv", csv.str());
  return io::make_report("prop1", {{"distances", distances}},
                         {{"critical_value", study.critical_value}, {"warnings", study.warnings}});
}

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunResult run(Command command, const ExperimentConfig& config, const RunOptions& options,
              std::ostream& log) {
  if (config.command && *config.command != command)
    throw ConfigError(ConfigError::Kind::validation, "command",
                      "config is for '" + std::string(to_string(*config.command)) + "'");
  const auto started = std::chrono::system_clock::now();
  const auto wall_start = std::chrono::steady_clock::now();
  const std::uint64_t seed = options.seed.value_or(config.seed);
  const std::string seed_source = options.seed ? "cli" : config.seed_defaulted ? "default" : "config";
  OutputSet out(options.out.value_or(config.output));
  log << "mrw " << to_string(command) << ": model " << config.model.name << ", seed " << seed << '\n';

  Json report;
  switch (command) {
    case Command::simulate: report = run_simulate(config, seed, out, false); break;
    case Command::backward: report = run_simulate(config, seed, out, true); break;
    case Command::stability: report = run_stability(config, seed, out); break;
    case Command::lyapunov: report = run_lyapunov(config, seed, out); break;
    case Command::ergodic: report = run_ergodic(config, seed, out); break;
    case Command::mean: report = run_mean(config, out); break;
    case Command::distribution: report = run_distribution(config, seed, out); break;
    case Command::prop1: report = run_prop1(config, seed, out, log); break;
  }
  const std::string report_name = std::string(to_string(command)) + ".json";
  out.write(report_name, dump(report));

  Json digests = Json::array();
  for (const auto& f : out.files())
    digests.push_back({{"file", f.filename().string()}, {"sha256", io::sha256_file(f)}});
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  Json manifest;
  manifest["tool"] = "mrw";
  manifest["version"] = std::string(kToolVersion);
  manifest["command"] = std::string(to_string(command));
  manifest["config"] = config.document;
  manifest["seed"] = seed;
  manifest["seed_source"] = seed_source;
  manifest["started_at"] = utc_timestamp(started);
  manifest["wall_clock_seconds"] = seconds;
  manifest["outputs"] = std::move(digests);
  io::write_file_atomic(out.dir() / "manifest.json", dump(manifest));
  log << "wrote " << out.files().size() << " files to " << out.dir().string() << '\n';

  return RunResult{out.dir(), out.files(), std::move(report)};
}

bool compare(const std::filesystem::path& a, const std::filesystem::path& b, double tolerance) {
  return io::reports_within(io::read_json_file(a), io::read_json_file(b), tolerance);
}

int exit_code_for(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const io::DocumentError&) {
    return kExitConfig;
  } catch (const io::SchemaMismatch&) {
    return kExitDomain;
  } catch (const Error&) {
    return kExitDomain;
  } catch (const io::IoError&) {
    return kExitIo;
  } catch (const std::filesystem::filesystem_error&) {
    return kExitIo;
  } catch (...) {
    return kExitDomain;
  }
}

}  // namespace mrw::app
