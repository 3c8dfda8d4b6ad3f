#include "brwld/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "brwld/errors.hpp"

namespace brwld {

namespace {

std::int64_t parse_index_key(const std::string& key, std::string_view where) {
  std::int64_t value = 0;
  const char* begin = key.data();
  const char* end = key.data() + key.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || key.empty()) {
    throw ValidationError(std::string(where) + ": key '" + key + "' is not an integer");
  }
  return value;
}

double probability_value(const Json& v, const std::string& key, std::string_view where) {
  if (!v.is_number()) throw ValidationError(std::string(where) + ": value for '" + key + "' is not a number");
  return v.get<double>();
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_rate(const RateValue& v) { return format_double(v.as_double()); }

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : "nan"; }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::logic_error("CSV row width does not match header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  const auto emit = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  emit(header_);
  for (const auto& row : rows_) emit(row);
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string check_csv(std::string_view text) {
  if (text.empty()) return "empty file";
  if (text.back() != '\n') return "missing trailing newline";
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    const std::string_view line = text.substr(start, end - start);
    ++line_no;
    std::size_t fields = 1;
    std::size_t cell_start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (i == cell_start) return "empty cell on line " + std::to_string(line_no);
        if (i < line.size()) ++fields;
        cell_start = i + 1;
      }
    }
    if (line_no == 1) {
      width = fields;
    } else if (fields != width) {
      return "line " + std::to_string(line_no) + " has " + std::to_string(fields) + " fields, header has " +
             std::to_string(width);
    }
    start = end + 1;
  }
  return {};
}

OffspringLaw parse_offspring(const Json& j) {
  if (!j.is_object() || j.empty()) throw ValidationError("offspring: expected a non-empty object {\"k\": p}");
  std::map<int, double> pmf;
  for (const auto& [key, value] : j.items()) {
    const std::int64_t k = parse_index_key(key, "offspring");
    if (k < 0 || k > 1'000'000) throw ValidationError("offspring: count " + key + " out of range");
    pmf[static_cast<int>(k)] = probability_value(value, key, "offspring");
  }
  try {
    return OffspringLaw::from_pmf(pmf);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("offspring: ") + e.what());
  } catch (const std::domain_error& e) {
    throw ValidationError(std::string("offspring: ") + e.what());
  }
}

Json offspring_to_json(const OffspringLaw& law) {
  Json out = Json::object();
  for (const auto& [k, p] : law.as_map()) out[std::to_string(k)] = p;
  return out;
}

StepModel parse_step(const Json& j) {
  if (!j.is_object()) throw ValidationError("step: expected an object");
  try {
    if (j.contains("pmf")) {
      reject_unknown_keys(j, "step", {"h", "pmf"});
      const double h = j.contains("h") ? json_number(j, "h", "step") : 1.0;
      const Json& pj = j.at("pmf");
      if (!pj.is_object() || pj.empty()) throw ValidationError("step.pmf: expected a non-empty object");
      std::map<std::int64_t, double> pmf;
      for (const auto& [key, value] : pj.items()) pmf[parse_index_key(key, "step.pmf")] = probability_value(value, key, "step.pmf");
      return make_lattice_surrogate(h, pmf);
    }
    reject_unknown_keys(j, "step", {"r", "lambda_plus", "lambda_minus"});
    return make_centered(json_number(j, "r", "step"), json_number(j, "lambda_plus", "step"),
                         json_number(j, "lambda_minus", "step"));
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("step: ") + e.what());
  }
}

Json step_to_json(const StepModel& step) {
  if (const auto* law = std::get_if<StepLaw>(&step)) {
    return Json{{"r", law->r()}, {"lambda_plus", law->lambda_plus()}, {"lambda_minus", law->lambda_minus()}};
  }
  const auto& lattice = std::get<LatticeStepLaw>(step);
  Json pmf = Json::object();
  for (std::int64_t i = lattice.min_index(); i <= lattice.max_index(); ++i) {
    if (lattice.prob(i) > 0.0) pmf[std::to_string(i)] = lattice.prob(i);
  }
  return Json{{"h", lattice.spacing()}, {"pmf", pmf}};
}

void reject_unknown_keys(const Json& object, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) throw ValidationError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (const auto a : allowed) known = known || key == a;
    if (!known) throw ValidationError(std::string(where) + ": unknown key '" + key + "'");
  }
}

double json_number(const Json& object, std::string_view key, std::string_view where) {
  const std::string k(key);
  if (!object.contains(k)) throw ValidationError(std::string(where) + ": missing '" + k + "'");
  const Json& v = object.at(k);
  if (!v.is_number()) throw ValidationError(std::string(where) + "." + k + ": expected a number");
  return v.get<double>();
}

std::int64_t json_integer(const Json& object, std::string_view key, std::string_view where) {
  const std::string k(key);
  if (!object.contains(k)) throw ValidationError(std::string(where) + ": missing '" + k + "'");
  const Json& v = object.at(k);
  if (!v.is_number_integer()) throw ValidationError(std::string(where) + "." + k + ": expected an integer");
  return v.get<std::int64_t>();
}

std::string json_string(const Json& object, std::string_view key, std::string_view where) {
  const std::string k(key);
  if (!object.contains(k)) throw ValidationError(std::string(where) + ": missing '" + k + "'");
  const Json& v = object.at(k);
  if (!v.is_string()) throw ValidationError(std::string(where) + "." + k + ": expected a string");
  return v.get<std::string>();
}

}  // namespace brwld
