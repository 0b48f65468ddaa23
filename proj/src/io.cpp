#include "mrw/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace mrw::io {

namespace {

const Json& member(const Json& j, const char* key, const std::string& field) {
  if (!j.is_object()) throw DocumentError(field, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw DocumentError(field + "." + key, "missing");
  return *it;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json matrix_to_json(const Matrix<double>& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Vector<double>& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Matrix<double> matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw DocumentError(field, "expected a nonempty array of rows");
  const auto rows = static_cast<Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw DocumentError(field, "expected rows as arrays");
  const auto cols = static_cast<Index>(j[0].size());
  Matrix<double> m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw DocumentError(field, "ragged matrix");
    for (Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw DocumentError(field, "expected numbers");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

Vector<double> vector_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw DocumentError(field, "expected a nonempty array");
  Vector<double> v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DocumentError(field, "expected numbers");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json chain_to_json(const TransitionMatrix<double>& chain, const std::vector<std::string>& labels) {
  Json out;
  out["p"] = matrix_to_json(chain.p());
  Json l = Json::array();
  for (Index i = 0; i < chain.n_states(); ++i)
    l.push_back(labels.empty() ? std::to_string(i) : labels.at(static_cast<std::size_t>(i)));
  out["labels"] = std::move(l);
  return out;
}

LabeledChain chain_from_json(const Json& j) {
  auto chain = TransitionMatrix<double>::validate(matrix_from_json(member(j, "p", "chain"), "chain.p"));
  std::vector<std::string> labels;
  if (auto it = j.find("labels"); it != j.end()) {
    if (!it->is_array() || static_cast<Index>(it->size()) != chain.n_states())
      throw DocumentError("chain.labels", "expected one label per state");
    for (const auto& l : *it) {
      if (!l.is_string()) throw DocumentError("chain.labels", "expected strings");
      labels.push_back(l.get<std::string>());
    }
  } else {
    for (Index i = 0; i < chain.n_states(); ++i) labels.push_back(std::to_string(i));
  }
  return {std::move(chain), std::move(labels)};
}

Json mode_system_to_json(const ModeSystem<double>& sys) {
  Json out;
  out["n"] = sys.n_agents();
  out["alpha"] = vector_to_json(sys.a().alpha());
  Json modes = Json::array();
  for (const auto& m : sys.modes())
    modes.push_back({{"b", matrix_to_json(m.b)}, {"w", matrix_to_json(m.w)}, {"r", vector_to_json(m.r)}});
  out["modes"] = std::move(modes);
  out["chain"] = chain_to_json(sys.chain());
  out["init_dist"] = vector_to_json(sys.init_dist().weights());
  return out;
}

namespace {

std::optional<Distribution<double>> init_dist_from(const Json& j) {
  auto it = j.find("init_dist");
  if (it == j.end()) return std::nullopt;
  return Distribution<double>::validate(vector_from_json(*it, "init_dist"));
}

void check_n(const Json& j, Index n) {
  if (auto it = j.find("n"); it != j.end()) {
    if (!it->is_number_integer() || it->get<Index>() != n)
      throw DocumentError("n", "does not match the matrix dimensions");
  }
}

}  // namespace

ModeSystem<double> mode_system_from_json(const Json& j) {
  LearningMatrix<double> a(vector_from_json(member(j, "alpha", "system"), "alpha"));
  check_n(j, a.size());
  const auto& modes_json = member(j, "modes", "system");
  if (!modes_json.is_array() || modes_json.empty()) throw DocumentError("modes", "expected a nonempty array");
  std::vector<Mode<double>> modes;
  for (std::size_t i = 0; i < modes_json.size(); ++i) {
    const std::string field = "modes[" + std::to_string(i) + "]";
    const auto& m = modes_json[i];
    modes.push_back(Mode<double>::make(matrix_from_json(member(m, "b", field), field + ".b"),
                                       matrix_from_json(member(m, "w", field), field + ".w"),
                                       vector_from_json(member(m, "r", field), field + ".r")));
  }
  return ModeSystem<double>(std::move(a), std::move(modes),
                            chain_from_json(member(j, "chain", "system")).chain, init_dist_from(j));
}

Json affine_system_to_json(const AffineSystem<double>& sys) {
  Json out;
  out["n"] = sys.dim();
  Json maps = Json::array();
  for (const auto& m : sys.maps()) maps.push_back({{"f", matrix_to_json(m.f)}, {"c", vector_to_json(m.c)}});
  out["maps"] = std::move(maps);
  out["chain"] = chain_to_json(sys.chain());
  out["init_dist"] = vector_to_json(sys.init_dist().weights());
  return out;
}

AffineSystem<double> affine_system_from_json(const Json& j) {
  const auto& maps_json = member(j, "maps", "system");
  if (!maps_json.is_array() || maps_json.empty()) throw DocumentError("maps", "expected a nonempty array");
  std::vector<AffineMap<double>> maps;
  for (std::size_t i = 0; i < maps_json.size(); ++i) {
    const std::string field = "maps[" + std::to_string(i) + "]";
    maps.push_back({matrix_from_json(member(maps_json[i], "f", field), field + ".f"),
                    vector_from_json(member(maps_json[i], "c", field), field + ".c")});
  }
  AffineSystem<double> sys(std::move(maps), chain_from_json(member(j, "chain", "system")).chain,
                           init_dist_from(j));
  check_n(j, sys.dim());
  return sys;
}

Json make_report(const std::string& kind, Json values, Json details) {
  Json out;
  out["schema"] = 1;
  out["kind"] = kind;
  out["values"] = std::move(values);
  out["details"] = std::move(details);
  return out;
}

Json stability_report_to_json(const StabilityReport<double>& r) {
  return make_report("stability", {{"value", r.value}, {"std_error", r.std_error}},
                     {{"k", r.k},
                      {"method", std::string(to_string(r.method))},
                      {"n_samples", r.n_samples},
                      {"norm", std::string(to_string(r.norm))},
                      {"verdict", std::string(to_string(r.verdict))}});
}

Json ergodic_report_to_json(const ErgodicReport<double>& r) {
  return make_report("ergodic", {{"mean", vector_to_json(r.running_average)}},
                     {{"n_steps", r.n_steps},
                      {"oracle_mean", vector_to_json(r.oracle_mean)},
                      {"deviation", r.deviation},
                      {"lyapunov_estimate", r.lyapunov_estimate}});
}

namespace {

bool leaves_within(const Json& a, const Json& b, double tol, const std::string& path) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    if (x == y) return true;
    return std::abs(x - y) <= tol;
  }
  // Non-finite values are written as null.
  if (a.is_null() && b.is_null()) return true;
  if (a.is_array() && b.is_array()) {
    if (a.size() != b.size()) throw SchemaMismatch(path + ": array lengths differ");
    bool ok = true;
    for (std::size_t i = 0; i < a.size(); ++i)
      ok = leaves_within(a[i], b[i], tol, path + "[" + std::to_string(i) + "]") && ok;
    return ok;
  }
  if (a.is_object() && b.is_object()) {
    if (a.size() != b.size()) throw SchemaMismatch(path + ": key sets differ");
    bool ok = true;
    for (auto it = a.begin(); it != a.end(); ++it) {
      auto other = b.find(it.key());
      if (other == b.end()) throw SchemaMismatch(path + ": key '" + it.key() + "' missing");
      ok = leaves_within(*it, *other, tol, path + "." + it.key()) && ok;
    }
    return ok;
  }
  if (a.is_null() || b.is_null()) return false;
  if (a.type() != b.type()) throw SchemaMismatch(path + ": value types differ");
  return a == b;
}

}  // namespace

bool reports_within(const Json& a, const Json& b, double tolerance) {
  for (const auto* doc : {&a, &b}) {
    if (!doc->is_object() || !doc->contains("values") || !(*doc)["values"].is_object())
      throw SchemaMismatch("document has no 'values' object");
    if (doc->value("schema", 0) != 1) throw SchemaMismatch("unsupported report schema");
  }
  return leaves_within(a["values"], b["values"], tolerance, "values");
}

void write_stability_csv_header(std::ostream& os) { os << "k,norm,method,value,std_error,verdict\n"; }

void write_stability_csv_row(std::ostream& os, const StabilityReport<double>& r) {
  os << r.k << ',' << to_string(r.norm) << ',' << to_string(r.method) << ','
     << format_double(r.value) << ',' << format_double(r.std_error) << ',' << to_string(r.verdict)
     << '\n';
}

void write_ergodic_csv(std::ostream& os, const ErgodicReport<double>& r) {
  os << "n_steps,coord,avg,oracle,deviation\n";
  for (Index i = 0; i < r.running_average.size(); ++i)
    os << r.n_steps << ',' << (i + 1) << ',' << format_double(r.running_average[i]) << ','
       << format_double(r.oracle_mean[i]) << ','
       << format_double(std::abs(r.running_average[i] - r.oracle_mean[i])) << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DocumentError(path.string(), e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 unavailable");
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

}  // namespace mrw::io
