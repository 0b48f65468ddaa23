#include "mrw/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace mrw::app {

namespace {

using io::Json;
using Kind = ConfigError::Kind;

std::string leaf(const std::string& path) {
  const auto dot = path.find_last_of('.');
  return dot == std::string::npos ? path : path.substr(dot + 1);
}

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw ConfigError(Kind::validation, leaf(path), path + ": " + what);
}

// Reads keys from one JSON object and rejects whatever is left unread.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_.empty() ? "document" : path_, "expected an object");
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const Json& require(const std::string& key) {
    const Json* v = find(key);
    if (!v) invalid(child(key), "missing");
    return *v;
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  std::optional<std::uint64_t> count(const std::string& key, std::uint64_t min_value) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer() || (v->is_number_integer() && v->get<std::int64_t>() < 0 &&
                                    !v->is_number_unsigned()))
      invalid(child(key), "expected a nonnegative integer");
    const auto x = v->get<std::uint64_t>();
    if (x < min_value) invalid(child(key), "must be at least " + std::to_string(min_value));
    return x;
  }

  std::optional<double> number(const std::string& key) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) invalid(child(key), "expected a number");
    return v->get<double>();
  }

  std::optional<std::string> string(const std::string& key) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) invalid(child(key), "expected a string");
    return v->get<std::string>();
  }

  std::optional<Vector<double>> vector(const std::string& key) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    return convert([&] { return io::vector_from_json(*v, child(key)); }, key);
  }

  std::optional<Matrix<double>> matrix(const std::string& key) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    return convert([&] { return io::matrix_from_json(*v, child(key)); }, key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) invalid(child(it.key()), "unknown key");
  }

 private:
  template <typename F>
  auto convert(F&& f, const std::string& key) -> decltype(f()) {
    try {
      return f();
    } catch (const io::DocumentError& e) {
      invalid(child(key), e.what());
    }
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> to_std(const Vector<double>& v) { return {v.data(), v.data() + v.size()}; }

void require_unit_interval(const Vector<double>& v, const std::string& path) {
  for (Index i = 0; i < v.size(); ++i)
    if (!(v[i] >= 0.0 && v[i] <= 1.0))
      invalid(path, "entry " + std::to_string(i) + " outside [0, 1]");
}

// Runs a model constructor, reporting domain failures as validation errors
// against `path`.
template <typename F>
auto build(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    invalid(path, e.what());
  } catch (const io::DocumentError& e) {
    invalid(path + "." + e.field(), e.what());
  }
}

std::optional<TransitionMatrix<double>> chain_param(ObjectReader& r) {
  auto p = r.matrix("chain");
  if (!p) return std::nullopt;
  return build(r.child("chain"), [&] { return TransitionMatrix<double>::validate(*p); });
}

Model from_modes(std::string name, ModeSystem<double> sys) {
  auto affine = sys.affine();
  return Model{std::move(name), std::move(sys), std::move(affine)};
}

// Scalar-coefficient maps F_i = f_i I, c_i = c_i 1 in dimension `dim`.
Model diagonal_preset(const std::string& name, ObjectReader& r, Vector<double> f_default,
                      Vector<double> c_default, Index dim_default,
                      std::optional<Matrix<double>> chain_default = std::nullopt) {
  const auto f = r.vector("f").value_or(f_default);
  const auto c = r.vector("c").value_or(c_default);
  const auto dim = static_cast<Index>(r.count("dim", 1).value_or(static_cast<std::uint64_t>(dim_default)));
  if (c.size() != f.size()) invalid(r.child("c"), "needs one offset per mode");
  auto chain = chain_param(r);
  return build(r.child(name), [&] {
    std::vector<AffineMap<double>> maps;
    for (Index i = 0; i < f.size(); ++i)
      maps.push_back({f[i] * Matrix<double>::Identity(dim, dim), Vector<double>::Constant(dim, c[i])});
    auto p = chain ? *chain
                   : chain_default ? TransitionMatrix<double>::validate(*chain_default)
                                   : TransitionMatrix<double>::iid(
                                         Vector<double>::Constant(f.size(), 1.0 / static_cast<double>(f.size())));
    return Model{name, std::nullopt, AffineSystem<double>(std::move(maps), std::move(p))};
  });
}

Matrix<double> mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix<double> m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

Vector<double> vec(std::initializer_list<double> xs) {
  Vector<double> v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Model ergodic_three_agent(ObjectReader& r) {
  auto chain = chain_param(r);
  return build(r.child("ergodic_three_agent"), [&] {
    const Matrix<double> averaging = mat({{0.5, 0.25, 0.25}, {0.25, 0.5, 0.25}, {0.25, 0.25, 0.5}});
    const Matrix<double> identity = Matrix<double>::Identity(3, 3);
    std::vector<Mode<double>> modes{Mode<double>::make(averaging, averaging, vec({1.0, 1.0, 1.0})),
                                    Mode<double>::make(identity, identity, vec({0.0, 0.5, 1.0}))};
    auto p = chain ? *chain : TransitionMatrix<double>::validate(mat({{0.7, 0.3}, {0.4, 0.6}}));
    return from_modes("ergodic_three_agent",
                      ModeSystem<double>(LearningMatrix<double>(vec({0.5, 0.4, 0.6})), std::move(modes),
                                         std::move(p)));
  });
}

Model preset_from_reader(const std::string& name, ObjectReader& r) {
  const std::string path = r.child(name);
  if (name == "classical_rw") {
    const auto n = static_cast<Index>(r.count("n", 1).value_or(1));
    const double alpha = r.number("alpha").value_or(0.5);
    if (!(alpha >= 0.0 && alpha <= 1.0)) invalid(r.child("alpha"), "must lie in [0, 1]");
    const auto levels = to_std(r.vector("levels").value_or(vec({0.0, 1.0})));
    auto chain = chain_param(r);
    return from_modes(name, build(path, [&] { return classical_rw<double>(n, alpha, levels, chain); }));
  }
  if (name == "epstein" || name == "prop1_two_mode") {
    const bool prop1 = name == "prop1_two_mode";
    const auto alpha = r.vector("alpha").value_or(prop1 ? vec({0.3, 0.6}) : vec({0.2}));
    require_unit_interval(alpha, r.child("alpha"));
    const auto levels = to_std(r.vector("levels").value_or(vec({0.0, 1.0})));
    auto chain = chain_param(r);
    if (!chain && prop1) chain = TransitionMatrix<double>::validate(mat({{0.8, 0.2}, {0.3, 0.7}}));
    return from_modes(name, build(path, [&] { return epstein<double>(alpha, levels, chain); }));
  }
  if (name == "friedkin_johnsen") {
    const auto w = r.matrix("w").value_or(mat({{0.5, 0.5}, {0.5, 0.5}}));
    const auto lambda = r.vector("lambda").value_or(vec({0.5, 0.5}));
    const auto u = r.vector("u").value_or(vec({0.0, 1.0}));
    require_unit_interval(lambda, r.child("lambda"));
    return from_modes(name, build(path, [&] { return friedkin_johnsen<double>(w, lambda, u); }));
  }
  if (name == "attract_neglect_repulse") {
    const auto w = r.matrix("w_avg").value_or(Matrix<double>::Constant(3, 3, 1.0 / 3.0));
    const auto probs = r.vector("probabilities").value_or(vec({0.5, 0.3, 0.2}));
    const double beta = r.number("beta").value_or(0.5);
    return from_modes(name, build(path, [&] { return attract_neglect_repulse<double>(w, probs, beta); }));
  }
  if (name == "scalar_mixture") return diagonal_preset(name, r, vec({2.0, 0.25}), vec({0.0, 0.0}), 1);
  if (name == "commuting_diagonal")
    return diagonal_preset(name, r, vec({0.5, 0.25}), vec({0.0, 0.0}), 2);
  if (name == "dichotomy_scalar")
    return diagonal_preset(name, r, vec({0.5, 0.25}), vec({0.5, 0.0}), 1,
                           mat({{0.6, 0.4}, {0.3, 0.7}}));
  if (name == "single_mode") {
    const auto f = r.matrix("f").value_or(mat({{0.5, 0.4}, {0.0, 0.3}}));
    const auto c = r.vector("c").value_or(Vector<double>::Zero(f.rows()));
    return build(path, [&] {
      return Model{name, std::nullopt,
                   AffineSystem<double>({AffineMap<double>{f, c}},
                                        TransitionMatrix<double>::validate(Matrix<double>::Ones(1, 1)))};
    });
  }
  if (name == "ergodic_three_agent") return ergodic_three_agent(r);
  invalid(r.child("preset"), "unknown preset '" + name + "'");
}

Model parse_model(const Json& j) {
  ObjectReader r(j, "model");
  Model model = [&] {
    if (const Json* preset = r.find("preset")) {
      if (!preset->is_string()) invalid("model.preset", "expected a string");
      const Json* params = r.find("params");
      static const Json empty = Json::object();
      return make_preset(preset->get<std::string>(), params ? *params : empty);
    }
    const Json& sys = r.require("system");
    if (!sys.is_object()) invalid("model.system", "expected an object");
    return build("model.system", [&] {
      if (sys.contains("maps")) {
        for (auto it = sys.begin(); it != sys.end(); ++it)
          if (it.key() != "n" && it.key() != "maps" && it.key() != "chain" && it.key() != "init_dist")
            invalid("model.system." + it.key(), "unknown key");
        return Model{"inline", std::nullopt, io::affine_system_from_json(sys)};
      }
      for (auto it = sys.begin(); it != sys.end(); ++it)
        if (it.key() != "n" && it.key() != "alpha" && it.key() != "modes" && it.key() != "chain" &&
            it.key() != "init_dist")
          invalid("model.system." + it.key(), "unknown key");
      if (const auto alpha = sys.find("alpha"); alpha != sys.end() && alpha->is_array()) {
        for (const auto& a : *alpha)
          if (a.is_number() && !(a.get<double>() >= 0.0 && a.get<double>() <= 1.0))
            invalid("model.system.alpha", "entries must lie in [0, 1]");
      }
      return from_modes("inline", io::mode_system_from_json(sys));
    });
  }();
  r.finish();
  return model;
}

InitialLaw<double> parse_init(const Json& j, Index dim) {
  ObjectReader r(j, "init");
  const auto kind = r.string("kind").value_or("point");
  auto check = [&](const Vector<double>& v, const std::string& key) {
    if (v.size() != dim) invalid(r.child(key), "expected dimension " + std::to_string(dim));
    return v;
  };
  InitialLaw<double> law = InitialLaw<double>::point(Vector<double>::Zero(dim));
  if (kind == "point") {
    law = InitialLaw<double>::point(check(r.vector("x0").value_or(Vector<double>::Zero(dim)), "x0"));
  } else if (kind == "gaussian") {
    const auto mean = check(r.vector("mean").value_or(Vector<double>::Zero(dim)), "mean");
    const auto sd = check(r.vector("stddev").value_or(Vector<double>::Ones(dim)), "stddev");
    if ((sd.array() < 0.0).any()) invalid(r.child("stddev"), "must be nonnegative");
    law = InitialLaw<double>::gaussian(mean, sd);
  } else if (kind == "samples") {
    const auto m = r.matrix("samples");
    if (!m) invalid(r.child("samples"), "missing");
    if (m->cols() != dim) invalid(r.child("samples"), "expected dimension " + std::to_string(dim));
    std::vector<Vector<double>> values;
    for (Index i = 0; i < m->rows(); ++i) values.push_back(m->row(i).transpose());
    law = InitialLaw<double>::samples(std::move(values));
  } else {
    invalid(r.child("kind"), "expected point, gaussian or samples");
  }
  r.finish();
  return law;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i + 1 < end; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace

std::string ConfigError::describe(Kind kind, const std::string& field, const std::string& what,
                                  std::size_t line) {
  std::string out = kind == Kind::parse ? "ParseError" : "ValidationError";
  out += "(" + field + ")";
  if (line > 0) out += " at line " + std::to_string(line);
  return out + ": " + what;
}

std::optional<Command> command_from_string(std::string_view name) {
  static constexpr std::pair<std::string_view, Command> table[] = {
      {"simulate", Command::simulate},         {"backward", Command::backward},
      {"stability", Command::stability},       {"lyapunov", Command::lyapunov},
      {"ergodic", Command::ergodic},           {"mean", Command::mean},
      {"distribution", Command::distribution}, {"prop1", Command::prop1}};
  for (const auto& [n, c] : table)
    if (n == name) return c;
  return std::nullopt;
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::backward: return "backward";
    case Command::stability: return "stability";
    case Command::lyapunov: return "lyapunov";
    case Command::ergodic: return "ergodic";
    case Command::mean: return "mean";
    case Command::distribution: return "distribution";
    case Command::prop1: return "prop1";
  }
  return "?";
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{
      "classical_rw",     "epstein",          "friedkin_johnsen", "attract_neglect_repulse",
      "scalar_mixture",   "commuting_diagonal", "dichotomy_scalar", "single_mode",
      "ergodic_three_agent", "prop1_two_mode"};
  return names;
}

Model make_preset(const std::string& name, const io::Json& params) {
  ObjectReader r(params, "model.params");
  Model model = preset_from_reader(name, r);
  r.finish();
  return model;
}

ExperimentConfig parse_config(std::string_view text) {
  Json document;
  try {
    document = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError(Kind::parse, "document", e.what(), line_of(text, e.byte));
  }
  ObjectReader r(document, "");

  const Json& schema = r.require("schema");
  if (!schema.is_number_integer() || schema.get<int>() != 1) invalid("schema", "expected 1");

  std::optional<Command> command;
  if (auto name = r.string("command")) {
    command = command_from_string(*name);
    if (!command) invalid("command", "unknown command '" + *name + "'");
  }
  ExperimentConfig cfg{.document = document, .command = command, .model = parse_model(r.require("model"))};
  const Index dim = cfg.model.affine.dim();
  cfg.init = InitialLaw<double>::point(Vector<double>::Zero(dim));
  if (const Json* init = r.find("init")) cfg.init = parse_init(*init, dim);

  cfg.horizon = r.count("horizon", 0).value_or(cfg.horizon);
  cfg.n_traj = r.count("n_traj", 1).value_or(cfg.n_traj);
  cfg.n_samples = r.count("n_samples", 2).value_or(cfg.n_samples);
  cfg.n_steps = r.count("n_steps", 1).value_or(cfg.n_steps);
  if (auto k = r.count("k", 1)) cfg.k = static_cast<Index>(*k);
  if (auto k = r.count("k_max", 1)) cfg.k_max = static_cast<Index>(*k);

  if (auto m = r.string("method")) {
    if (*m == "exact") cfg.method = StabilityMethod::exact;
    else if (*m == "monte_carlo") cfg.method = StabilityMethod::monte_carlo;
    else if (*m == "auto") cfg.method = StabilityMethod::automatic;
    else invalid("method", "expected exact, monte_carlo or auto");
  }
  if (auto n = r.string("norm")) {
    if (*n == "one") cfg.norm = Norm::one;
    else if (*n == "two") cfg.norm = Norm::two;
    else if (*n == "inf") cfg.norm = Norm::inf;
    else invalid("norm", "expected one, two or inf");
  }
  if (auto s = r.count("seed", 0)) {
    cfg.seed = *s;
    cfg.seed_defaulted = false;
  }
  if (const Json* snaps = r.find("snapshots")) {
    if (!snaps->is_array() || snaps->empty()) invalid("snapshots", "expected a nonempty array");
    for (const auto& s : *snaps) {
      if (!s.is_number_unsigned()) invalid("snapshots", "expected nonnegative integers");
      cfg.snapshots.push_back(s.get<std::size_t>());
    }
  }
  if (auto dists = r.matrix("init_dists")) {
    if (dists->cols() != cfg.model.affine.n_modes())
      invalid("init_dists", "expected one weight per mode");
    for (Index i = 0; i < dists->rows(); ++i)
      cfg.init_dists.push_back(
          build("init_dists", [&] { return Distribution<double>::validate(dists->row(i).transpose()); }));
  }
  if (auto out = r.string("output")) cfg.output = *out;
  r.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io::IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace mrw::app
