// JSON documents for chains, systems and reports; CSV writers for reports.
#ifndef MRW_IO_HPP
#define MRW_IO_HPP

#include "mrw/analysis.hpp"
#include "mrw/chain.hpp"
#include "mrw/model.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrw::io {

using Json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed document (wrong types, missing keys). `field` names the offending
// key path.
class DocumentError : public std::runtime_error {
 public:
  DocumentError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class SchemaMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabeledChain {
  TransitionMatrix<double> chain;
  std::vector<std::string> labels;
};

Json matrix_to_json(const Matrix<double>& m);
Json vector_to_json(const Vector<double>& v);
Matrix<double> matrix_from_json(const Json& j, const std::string& field);
Vector<double> vector_from_json(const Json& j, const std::string& field);

// {"p": [[...]], "labels": [...]}; labels default to "0".."N-1".
Json chain_to_json(const TransitionMatrix<double>& chain,
                   const std::vector<std::string>& labels = {});
LabeledChain chain_from_json(const Json& j);

// {"n", "alpha", "modes": [{"b","w","r"}], "chain", "init_dist"}
Json mode_system_to_json(const ModeSystem<double>& sys);
ModeSystem<double> mode_system_from_json(const Json& j);

// {"n", "maps": [{"f","c"}], "chain", "init_dist"}
Json affine_system_to_json(const AffineSystem<double>& sys);
AffineSystem<double> affine_system_from_json(const Json& j);

// Report documents: {"schema": 1, "kind": ..., "values": {...}, "details": {...}}.
// Only "values" takes part in comparisons.
Json make_report(const std::string& kind, Json values, Json details = Json::object());
Json stability_report_to_json(const StabilityReport<double>& r);
Json ergodic_report_to_json(const ErgodicReport<double>& r);

// True iff every numeric leaf of a["values"] is within `tolerance` of the
// matching leaf of b["values"]. Throws SchemaMismatch when the key sets or
// shapes differ.
bool reports_within(const Json& a, const Json& b, double tolerance);

void write_stability_csv_header(std::ostream& os);
void write_stability_csv_row(std::ostream& os, const StabilityReport<double>& r);
void write_ergodic_csv(std::ostream& os, const ErgodicReport<double>& r);

// 17 significant digits.
std::string format_double(double x);

Json read_json_file(const std::filesystem::path& path);

// Writes via a temporary file in the same directory and renames it.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace mrw::io

#endif  // MRW_IO_HPP
