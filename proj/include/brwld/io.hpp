#pragma once

// Text output and config parsing shared by the CLI and the acceptance suite.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "brwld/gw_core.hpp"
#include "brwld/rate_value.hpp"
#include "brwld/simulate.hpp"
#include "brwld/step_law.hpp"

namespace brwld {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double v);
std::string format_rate(const RateValue& v);
std::string format_optional(const std::optional<double>& v);

/// Minimal CSV writer. Fields are written verbatim; callers only emit numbers
/// and identifiers.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

/// Header + rectangular rows with no empty cells. Returns an error message or empty.
std::string check_csv(std::string_view text);

/// {"0": 0.25, "2": 0.75} -> OffspringLaw (pmf only, no supercriticality check).
OffspringLaw parse_offspring(const Json& j);
Json offspring_to_json(const OffspringLaw& law);

/// {"r": .., "lambda_plus": .., "lambda_minus": ..} or, for a lattice law,
/// {"h": .., "pmf": {"-1": .., "1": ..}}.
StepModel parse_step(const Json& j);
Json step_to_json(const StepModel& step);

/// Throws ValidationError naming the first key not in `allowed`.
void reject_unknown_keys(const Json& object, std::string_view where, std::initializer_list<std::string_view> allowed);

/// Typed field access with ValidationError on a wrong type.
double json_number(const Json& object, std::string_view key, std::string_view where);
std::int64_t json_integer(const Json& object, std::string_view key, std::string_view where);
std::string json_string(const Json& object, std::string_view key, std::string_view where);

}  // namespace brwld
