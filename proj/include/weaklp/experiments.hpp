#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weaklp/errors.hpp"
#include "weaklp/fields.hpp"

namespace weaklp {

inline constexpr int kReportSchema = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Invalid configuration; `where` names the offending field ("lambdas[0]") or
/// the line and column of a JSON syntax error.
class ConfigError : public InvalidParameter {
 public:
  ConfigError(std::string where, const std::string& what)
      : InvalidParameter(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// Parses JSON text; syntax errors become ConfigError("line L, column C").
nlohmann::json parse_config_text(const std::string& text);
nlohmann::json load_config(const std::filesystem::path& path);

/// {"kind": "bump" | "product_bump" | "mollified_indicator" | "sum" | "zero" |
/// "catalogue", ...}; see the README for the parameters of each kind.
ScalarField field_from_json(const nlohmann::json& spec, const std::string& where = "field");

enum class Status { pass, inconclusive, fail, error };
std::string to_string(Status s);
/// 0 pass, 3 inconclusive, 2 fail, 1 error.
int exit_code(Status s);
/// The more severe of the two (pass < inconclusive < fail < error).
Status worst(Status a, Status b);

struct Verdict {
  std::string key;          // e.g. "thm1.2:limit"
  Status status = Status::pass;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string rule;         // how measured, expected and tolerance combine
};

struct CsvTable {
  std::string name;         // file name, e.g. "profile.csv"
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Doubles are written with 17 significant digits.
  static std::string cell(double v);
  static std::string cell(std::int64_t v);
  static std::string cell(std::uint64_t v);
  static std::string cell(int v) { return cell(static_cast<std::int64_t>(v)); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  template <class... T>
  void add(const T&... values) {
    rows.push_back({cell(values)...});
  }
  std::string text() const;
};

struct RunOptions {
  int workers = 0;                       // 0: WEAKLP_WORKERS or hardware
  std::optional<std::uint64_t> seed;     // overrides the config seed
};

struct ExperimentResult {
  nlohmann::json report;                 // deterministic: no clocks
  nlohmann::json timing;                 // wall-clock seconds per stage
  std::vector<CsvTable> tables;
  std::vector<Verdict> verdicts;
  Status status = Status::pass;
};

/// Validates and runs one experiment (or a sweep). Throws ConfigError on an
/// invalid config; numerical refusals from the library propagate unchanged.
ExperimentResult run_experiment(const nlohmann::json& config, const RunOptions& opt = {});

/// Writes every CSV, report.json and timing.json into `dir` (created when
/// missing). Throws std::runtime_error before writing anything if one of the
/// files already exists: runs never overwrite earlier outputs.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace weaklp
