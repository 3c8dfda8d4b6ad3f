#include "brwld/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "brwld/acceptance.hpp"
#include "brwld/errors.hpp"
#include "brwld/estimate.hpp"
#include "brwld/io.hpp"
#include "brwld/oracle.hpp"
#include "brwld/rates.hpp"
#include "brwld/simulate.hpp"
#include "brwld/svg.hpp"

#ifndef BRWLD_VERSION
#define BRWLD_VERSION "0.0.0"
#endif

namespace brwld {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  unsigned workers = 1;
  std::vector<std::string> sets;
  std::string criteria;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
};

// Resolved run settings: flags override the config document.
struct RunContext {
  Json config;
  std::uint64_t seed = 1;
  fs::path out = ".";
  unsigned workers = 1;
};

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects key.path=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded() || value.is_object() || value.is_array()) value = raw;
  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ValidationError("--set: empty key segment in '" + path + "'");
    if (!node->is_object()) throw ValidationError("--set: '" + path + "' does not name a field of an object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

RunContext resolve(const CommonFlags& flags, std::initializer_list<std::string_view> allowed, bool config_required) {
  RunContext ctx;
  if (!flags.config_path.empty()) {
    const fs::path path(flags.config_path);
    if (!fs::exists(path)) throw ValidationError("config file not found: " + flags.config_path);
    ctx.config = Json::parse(read_text(path), nullptr, false);
    if (ctx.config.is_discarded()) throw ValidationError("config is not valid JSON: " + flags.config_path);
    if (!ctx.config.is_object()) throw ValidationError("config must be a JSON object");
  } else if (config_required) {
    throw ValidationError("this command needs --config <path>");
  } else {
    ctx.config = Json::object();
  }
  for (const auto& s : flags.sets) apply_override(ctx.config, s);
  reject_unknown_keys(ctx.config, "config", allowed);

  if (ctx.config.contains("seed")) {
    const Json& s = ctx.config["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ValidationError("config.seed must be a non-negative integer");
    }
    ctx.seed = s.get<std::uint64_t>();
  }
  if (ctx.config.contains("out")) ctx.out = json_string(ctx.config, "out", "config");
  if (ctx.config.contains("workers")) {
    const std::int64_t w = json_integer(ctx.config, "workers", "config");
    if (w < 1) throw ValidationError("config.workers must be at least 1");
    ctx.workers = static_cast<unsigned>(w);
  }
  if (flags.seed_opt->count()) ctx.seed = flags.seed;
  if (flags.out_opt->count()) ctx.out = flags.out;
  if (flags.workers_opt->count()) {
    if (flags.workers < 1) throw ValidationError("--workers must be at least 1");
    ctx.workers = flags.workers;
  }
  return ctx;
}

struct Model {
  std::string name;
  OffspringLaw offspring;
  StepModel step;
};

Model parse_model(const Json& j, std::string_view where, bool named) {
  if (!j.is_object()) throw ValidationError(std::string(where) + ": expected an object");
  if (named) {
    reject_unknown_keys(j, where, {"name", "offspring", "step"});
  } else {
    reject_unknown_keys(j, where, {"offspring", "step"});
  }
  if (!j.contains("offspring")) throw ValidationError(std::string(where) + ": missing 'offspring'");
  if (!j.contains("step")) throw ValidationError(std::string(where) + ": missing 'step'");
  Model m{named ? json_string(j, "name", where) : std::string(), parse_offspring(j.at("offspring")),
          parse_step(j.at("step"))};
  if (named && (m.name.empty() || m.name.find_first_of("/\\,. ") != std::string::npos)) {
    throw ValidationError(std::string(where) + ".name must be a non-empty identifier");
  }
  return m;
}

Model single_model(const Json& config) {
  if (!config.contains("model")) throw ValidationError("config: missing 'model'");
  return parse_model(config.at("model"), "model", false);
}

ModelParams model_params(const Model& m, std::string_view where) {
  const auto* step = std::get_if<StepLaw>(&m.step);
  if (!step) throw ValidationError(std::string(where) + ": rate functions need a stretched-exponential step law");
  try {
    return ModelParams(validate_offspring(m.offspring.as_map()), *step);
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(std::string(where) + ": " + e.what());
  }
}

const Json& section(const Json& config, const std::string& key) {
  if (!config.contains(key)) throw ValidationError("config: missing '" + key + "' section");
  const Json& s = config.at(key);
  if (!s.is_object()) throw ValidationError("config." + key + ": expected an object");
  return s;
}

int int_field(const Json& obj, std::string_view key, std::string_view where, std::int64_t lo, std::int64_t hi) {
  const std::int64_t v = json_integer(obj, key, where);
  if (v < lo || v > hi) {
    throw ValidationError(std::string(where) + "." + std::string(key) + " must lie in [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

std::uint64_t count_field(const Json& obj, std::string_view key, std::string_view where, std::uint64_t lo) {
  const std::int64_t v = json_integer(obj, key, where);
  if (v < static_cast<std::int64_t>(lo)) {
    throw ValidationError(std::string(where) + "." + std::string(key) + " must be at least " + std::to_string(lo));
  }
  return static_cast<std::uint64_t>(v);
}

bool bool_field(const Json& obj, std::string_view key, std::string_view where, bool fallback) {
  const std::string k(key);
  if (!obj.contains(k)) return fallback;
  if (!obj.at(k).is_boolean()) throw ValidationError(std::string(where) + "." + k + ": expected true or false");
  return obj.at(k).get<bool>();
}

Process parse_process(const Json& obj, std::string_view where) {
  if (!obj.contains("process")) return Process::Brw;
  const std::string p = json_string(obj, "process", where);
  if (p == "brw") return Process::Brw;
  if (p == "ind") return Process::Independent;
  throw ValidationError(std::string(where) + ".process must be \"brw\" or \"ind\"");
}

std::string_view process_name(Process p) { return p == Process::Brw ? "brw" : "ind"; }

RunOptions run_options(const Json& obj, std::string_view where, unsigned workers) {
  RunOptions o;
  o.workers = workers;
  if (obj.contains("probe_attempts")) o.probe_attempts = count_field(obj, "probe_attempts", where, 1);
  if (obj.contains("min_acceptance")) o.min_acceptance = json_number(obj, "min_acceptance", where);
  return o;
}

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  void write(const std::string& name, std::string_view text) {
    write_text(dir_ / name, text);
    files_.push_back(name);
  }
  void manifest(std::string_view command, const RunContext& ctx, std::uint64_t truncated) {
    Json m;
    m["command"] = command;
    m["version"] = BRWLD_VERSION;
    m["seed"] = ctx.seed;
    m["config"] = ctx.config;
    m["outputs"] = files_;
    m["truncated_runs"] = truncated;
    write_text(dir_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

// ---- rates --------------------------------------------------------------

std::vector<double> resolve_grid(const Json& grid, double alpha) {
  const auto value = [alpha](const Json& v, std::string_view where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && v.get<std::string>() == "alpha") return alpha;
    throw ValidationError(std::string(where) + ": grid values must be numbers or \"alpha\"");
  };
  std::vector<double> xs;
  if (grid.is_array()) {
    for (const auto& v : grid) xs.push_back(value(v, "rates.x_grid"));
  } else if (grid.is_object()) {
    reject_unknown_keys(grid, "rates.x_grid", {"from", "to", "count"});
    const double lo = value(grid.at("from"), "rates.x_grid.from");
    const double hi = value(grid.at("to"), "rates.x_grid.to");
    const int count = int_field(grid, "count", "rates.x_grid", 1, 1'000'000);
    for (int i = 0; i < count; ++i) xs.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  } else {
    throw ValidationError("rates.x_grid must be an array or {from, to, count}");
  }
  if (xs.empty()) throw ValidationError("rates.x_grid is empty");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) throw ValidationError("rates.x_grid contains a non-finite value");
    if (i > 0 && xs[i] <= xs[i - 1]) throw ValidationError("rates.x_grid must be strictly ascending");
  }
  return xs;
}

int cmd_rates(const CommonFlags& flags, std::ostream& out) {
  RunContext ctx = resolve(flags, {"model", "models", "rates", "seed", "out", "workers"}, true);
  const Json& rates = section(ctx.config, "rates");
  reject_unknown_keys(rates, "rates", {"kinds", "x_grid"});
  if (!rates.contains("kinds") || !rates.at("kinds").is_array() || rates.at("kinds").empty()) {
    throw ValidationError("rates.kinds must be a non-empty array");
  }
  std::vector<RateKind> kinds;
  for (const auto& k : rates.at("kinds")) {
    if (!k.is_string()) throw ValidationError("rates.kinds entries must be strings");
    kinds.push_back(parse_rate_kind(k.get<std::string>()));
  }
  if (!rates.contains("x_grid")) throw ValidationError("rates: missing 'x_grid'");

  std::vector<Model> models;
  const bool many = ctx.config.contains("models");
  if (many == ctx.config.contains("model")) throw ValidationError("config needs exactly one of 'model' or 'models'");
  if (many) {
    const Json& list = ctx.config.at("models");
    if (!list.is_array() || list.empty()) throw ValidationError("models must be a non-empty array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
      models.push_back(parse_model(list[i], "models[" + std::to_string(i) + "]", true));
      if (!names.insert(models.back().name).second) throw ValidationError("duplicate model name " + models.back().name);
    }
  } else {
    models.push_back(single_model(ctx.config));
  }
  std::vector<ModelParams> params;
  std::vector<std::vector<double>> grids;
  for (const auto& m : models) {
    params.push_back(model_params(m, many ? "models." + m.name : "model"));
    grids.push_back(resolve_grid(rates.at("x_grid"), params.back().alpha()));
  }

  Outputs outputs(ctx.out);
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string stem = many ? "rates_" + models[i].name : "rates";
    CsvTable csv({"x", "value", "kind"});
    std::vector<RateCurve> curves;
    for (const RateKind kind : kinds) {
      // H lives below alpha and IGW on growth exponents in [0, log m]; other points are skipped.
      std::vector<double> xs;
      for (const double x : grids[i]) {
        if (kind == RateKind::H && x >= params[i].alpha()) continue;
        if (kind == RateKind::IGW && (x < 0.0 || x > params[i].log_m())) continue;
        xs.push_back(x);
      }
      curves.push_back(rate_curve(params[i], kind, xs));
      const auto& c = curves.back();
      for (std::size_t j = 0; j < c.x_grid.size(); ++j) {
        csv.add_row({format_double(c.x_grid[j]), format_rate(c.values[j]), std::string(to_string(kind))});
      }
    }
    outputs.write(stem + ".csv", csv.str());
    const std::string title = "rate functions, alpha = " + format_double(params[i].alpha());
    outputs.write(stem + ".svg", render_rate_svg(curves, title));
    out << "wrote " << (fs::path(ctx.out) / (stem + ".csv")).string() << "\n";
  }
  outputs.manifest("rates", ctx, 0);
  return kExitOk;
}

// ---- simulate -----------------------------------------------------------

SimConfig sim_config(const Model& model, const Json& s, std::string_view where, std::uint64_t seed) {
  SimConfig cfg{model.offspring, model.step, 1, 1'000'000, seed, true};
  cfg.horizon_n = int_field(s, "n", where, 0, 100'000);
  if (s.contains("population_cap")) {
    cfg.population_cap = static_cast<std::int64_t>(count_field(s, "population_cap", where, 1));
  }
  cfg.condition_on_survival = bool_field(s, "condition_on_survival", where, true);
  validate(cfg);
  return cfg;
}

int cmd_simulate(const CommonFlags& flags, std::ostream& out) {
  RunContext ctx = resolve(flags, {"model", "simulate", "seed", "out", "workers"}, true);
  const Model model = single_model(ctx.config);
  const Json& s = section(ctx.config, "simulate");
  reject_unknown_keys(s, "simulate", {"n", "replicas", "process", "condition_on_survival", "population_cap",
                                      "probe_attempts", "min_acceptance"});
  const SimConfig cfg = sim_config(model, s, "simulate", ctx.seed);
  const std::uint64_t replicas = count_field(s, "replicas", "simulate", 1);
  const Process process = parse_process(s, "simulate");
  const RunOptions options = run_options(s, "simulate", ctx.workers);

  std::vector<BrwRunResult> runs;
  std::uint64_t truncated = 0;
  if (cfg.condition_on_survival) {
    ConditionedRuns c = run_conditioned(cfg, process, replicas, options);
    truncated = c.truncated;
    runs = std::move(c.runs);
  } else {
    for (auto& run : run_replicas(cfg, process, replicas, ctx.workers)) {
      if (run.truncated) {
        ++truncated;
      } else {
        runs.push_back(std::move(run));
      }
    }
  }
  CsvTable csv({"replica", "survived", "Mn", "Zn"});
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    csv.add_row({std::to_string(i), run.survived_to_n ? "1" : "0",
                 format_double(run.max_position.value_or(-std::numeric_limits<double>::infinity())),
                 std::to_string(run.population_path.back())});
  }
  Outputs outputs(ctx.out);
  outputs.write("simulate.csv", csv.str());
  outputs.manifest("simulate", ctx, truncated);
  out << "wrote " << runs.size() << " runs (" << truncated << " truncated) to "
      << (fs::path(ctx.out) / "simulate.csv").string() << "\n";
  return kExitOk;
}

// ---- estimate -----------------------------------------------------------

int cmd_estimate(const CommonFlags& flags, std::ostream& out, std::ostream& err) {
  RunContext ctx = resolve(flags, {"model", "estimate", "sumasmax", "seed", "out", "workers"}, true);
  const Model model = single_model(ctx.config);
  const bool has_events = ctx.config.contains("estimate");
  const bool has_sumasmax = ctx.config.contains("sumasmax");
  if (!has_events && !has_sumasmax) throw ValidationError("config needs an 'estimate' or 'sumasmax' section");

  // Validate everything before simulating.
  struct EventJob {
    Event event;
    std::string kind;
  };
  std::vector<int> n_list;
  std::vector<EventJob> jobs;
  std::uint64_t replicas = 0;
  double level = 0.99;
  std::optional<SimConfig> base;
  RunOptions options;
  if (has_events) {
    const Json& e = section(ctx.config, "estimate");
    reject_unknown_keys(e, "estimate", {"n", "n_list", "events", "replicas", "level", "population_cap",
                                        "probe_attempts", "min_acceptance"});
    if (e.contains("n") == e.contains("n_list")) throw ValidationError("estimate needs exactly one of 'n' or 'n_list'");
    if (e.contains("n")) {
      n_list.push_back(int_field(e, "n", "estimate", 0, 100'000));
    } else {
      if (!e.at("n_list").is_array() || e.at("n_list").empty()) throw ValidationError("estimate.n_list must be a non-empty array");
      for (const auto& v : e.at("n_list")) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ValidationError("estimate.n_list entries must be non-negative integers");
        if (!n_list.empty() && v.get<int>() <= n_list.back()) throw ValidationError("estimate.n_list must be strictly ascending");
        n_list.push_back(v.get<int>());
      }
    }
    replicas = count_field(e, "replicas", "estimate", 0);
    if (replicas < 100) throw ValidationError("estimate.replicas must be at least 100, got " + std::to_string(replicas));
    if (e.contains("level")) {
      level = json_number(e, "level", "estimate");
      if (!(level > 0.0 && level < 1.0)) throw ValidationError("estimate.level must lie in (0, 1)");
    }
    if (!e.contains("events") || !e.at("events").is_array() || e.at("events").empty()) {
      throw ValidationError("estimate.events must be a non-empty array");
    }
    for (std::size_t i = 0; i < e.at("events").size(); ++i) {
      const Json& ev = e.at("events")[i];
      const std::string where = "estimate.events[" + std::to_string(i) + "]";
      reject_unknown_keys(ev, where, {"side", "x", "process"});
      EventJob job;
      job.event.side = parse_side(json_string(ev, "side", where));
      job.event.threshold = json_number(ev, "x", where);
      job.event.process = parse_process(ev, where);
      job.kind = std::string(process_name(job.event.process)) + "_" + std::string(to_string(job.event.side));
      jobs.push_back(job);
    }
    Json sim = Json::object();
    sim["n"] = n_list.front();
    if (e.contains("population_cap")) sim["population_cap"] = e.at("population_cap");
    base = sim_config(model, sim, "estimate", ctx.seed);
    options = run_options(e, "estimate", ctx.workers);
  }
  std::optional<StepLaw> sumasmax_step;
  int sm_n = 1;
  double sm_x = 0.0, sm_level = 0.99;
  std::uint64_t sm_replicas = 0;
  if (has_sumasmax) {
    const Json& s = section(ctx.config, "sumasmax");
    reject_unknown_keys(s, "sumasmax", {"n", "x_n", "replicas", "level"});
    const auto* step = std::get_if<StepLaw>(&model.step);
    if (!step) throw ValidationError("sumasmax needs a stretched-exponential step law");
    sumasmax_step = *step;
    sm_n = int_field(s, "n", "sumasmax", 1, 1'000'000);
    sm_x = json_number(s, "x_n", "sumasmax");
    if (!(sm_x > 0.0)) throw ValidationError("sumasmax.x_n must be positive");
    sm_replicas = count_field(s, "replicas", "sumasmax", 1);
    if (s.contains("level")) sm_level = json_number(s, "level", "sumasmax");
  }

  Outputs outputs(ctx.out);
  if (has_events) {
    CsvTable csv({"n", "x", "kind", "p_hat", "ci_low", "ci_high", "empirical_rate", "analytic_rate"});
    for (const int n : n_list) {
      SimConfig cfg = *base;
      cfg.horizon_n = n;
      for (const auto& job : jobs) {
        const TailEstimate est = estimate_event(cfg, job.event, replicas, options, level);
        csv.add_row({std::to_string(n), format_double(job.event.threshold), job.kind, format_double(est.p_hat),
                     format_double(est.ci_low), format_double(est.ci_high), format_optional(est.empirical_rate),
                     est.analytic_rate ? format_rate(*est.analytic_rate) : "nan"});
      }
    }
    outputs.write("estimate.csv", csv.str());
    out << "wrote " << (fs::path(ctx.out) / "estimate.csv").string() << "\n";
  }
  if (has_sumasmax) {
    const SumAsMaxResult res = sumasmax_ratio(*sumasmax_step, sm_n, sm_x, sm_replicas, ctx.seed, ctx.workers, sm_level);
    if (res.outside_regime) {
      err << "warning: x_n = " << format_double(sm_x) << " is below 10 n^{1/(2-2r)}; the asymptotic regime is not reached\n";
    }
    if (!res.ratio || *res.ratio < 0.5 || *res.ratio > 2.0) {
      err << "warning: ratio " << format_optional(res.ratio) << " lies outside [0.5, 2]\n";
    }
    CsvTable csv({"n", "x_n", "successes", "trials", "denominator", "ratio", "ci_low", "ci_high", "outside_regime"});
    csv.add_row({std::to_string(sm_n), format_double(sm_x), std::to_string(res.successes), std::to_string(res.trials),
                 format_double(res.denominator), format_optional(res.ratio), format_double(res.ci.low),
                 format_double(res.ci.high), res.outside_regime ? "1" : "0"});
    outputs.write("sumasmax.csv", csv.str());
    out << "wrote " << (fs::path(ctx.out) / "sumasmax.csv").string() << "\n";
  }
  outputs.manifest("estimate", ctx, 0);
  return kExitOk;
}

// ---- oracle -------------------------------------------------------------

int cmd_oracle(const CommonFlags& flags, std::ostream& out) {
  RunContext ctx = resolve(flags, {"model", "oracle", "seed", "out", "workers"}, true);
  const Model model = single_model(ctx.config);
  const Json& o = section(ctx.config, "oracle");
  reject_unknown_keys(o, "oracle", {"n", "process", "conditional", "max_points"});
  const auto* lattice = std::get_if<LatticeStepLaw>(&model.step);
  if (!lattice) throw ValidationError("oracle needs a lattice step law {\"h\": .., \"pmf\": {..}}");
  const int n = int_field(o, "n", "oracle", 0, 10'000'000);
  const Process process = parse_process(o, "oracle");
  const bool conditional = bool_field(o, "conditional", "oracle", false);
  OracleOptions options;
  if (o.contains("max_points")) options.max_points = count_field(o, "max_points", "oracle", 1);

  LatticeDist dist = process == Process::Brw ? brw_max_cdf_exact(*lattice, model.offspring, n, options)
                                             : ind_max_cdf_exact(*lattice, model.offspring, n, options);
  if (conditional) dist = conditional_cdf(dist);

  CsvTable csv({"x", "cdf"});
  // One extra lattice point on each side shows both limits of the CDF.
  for (std::int64_t i = dist.min_index - 1; i <= dist.max_index() + 1; ++i) {
    csv.add_row({format_double(dist.h * static_cast<double>(i)), format_double(dist.at_index(i))});
  }
  Outputs outputs(ctx.out);
  outputs.write("oracle.csv", csv.str());
  Json sidecar{{"h", dist.h}, {"extinct_mass", dist.extinct_mass}, {"n", n}};
  outputs.write("oracle.json", sidecar.dump(2) + "\n");
  outputs.manifest("oracle", ctx, 0);
  out << "wrote " << (fs::path(ctx.out) / "oracle.csv").string() << "\n";
  return kExitOk;
}

// ---- verify -------------------------------------------------------------

std::set<int> parse_criteria(const std::string& text) {
  std::set<int> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const int id = std::stoi(item, &used);
      if (used != item.size() || id < 1 || id > 9) throw std::invalid_argument(item);
      ids.insert(id);
    } catch (const std::exception&) {
      throw ValidationError("--criteria expects ids 1..9 separated by commas, got '" + item + "'");
    }
  }
  return ids;
}

int cmd_verify(const CommonFlags& flags, std::ostream& out) {
  RunContext ctx = resolve(flags, {"seed", "out", "workers"}, false);
  if (!flags.out_opt->count() && !ctx.config.contains("out")) ctx.out = "verify_out";
  if (!flags.seed_opt->count() && !ctx.config.contains("seed")) ctx.seed = AcceptanceOptions{}.seed;
  AcceptanceOptions options;
  options.seed = ctx.seed;
  options.workers = ctx.workers;
  options.out_dir = ctx.out;
  options.only = parse_criteria(flags.criteria);
  const auto results = run_acceptance_suite(options);
  out << format_acceptance_table(results);

  Json m;
  m["command"] = "verify";
  m["version"] = BRWLD_VERSION;
  m["seed"] = ctx.seed;
  m["config"] = ctx.config;
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(ctx.out)) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path().filename().string());
  }
  std::sort(files.begin(), files.end());
  m["outputs"] = files;
  m["truncated_runs"] = 0;
  write_text(ctx.out / "manifest.json", m.dump(2) + "\n");
  const bool all = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  return all ? kExitOk : kExitVerifyFailed;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_criteria) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  flags.seed_opt = cmd->add_option("--seed", flags.seed, "Random seed (u64)");
  flags.out_opt = cmd->add_option("--out", flags.out, "Output directory");
  flags.workers_opt = cmd->add_option("--workers", flags.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--set", flags.sets, "Override a scalar config field: key.path=value");
  if (with_criteria) cmd->add_option("--criteria", flags.criteria, "Comma-separated criterion ids (default: all)");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Branching random walk large-deviation toolkit"};
  app.set_version_flag("--version", BRWLD_VERSION);
  app.require_subcommand(1, 1);
  CommonFlags rates_flags, sim_flags, est_flags, oracle_flags, verify_flags;
  auto* rates = app.add_subcommand("rates", "Evaluate rate functions on a grid (rates.csv, rates.svg)");
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate maxima and populations (simulate.csv)");
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate tail probabilities and rates (estimate.csv)");
  auto* oracle = app.add_subcommand("oracle", "Exact lattice CDF of a maximum (oracle.csv, oracle.json)");
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  add_common(rates, rates_flags, false);
  add_common(simulate_cmd, sim_flags, false);
  add_common(estimate_cmd, est_flags, false);
  add_common(oracle, oracle_flags, false);
  add_common(verify, verify_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*rates) return cmd_rates(rates_flags, out);
    if (*simulate_cmd) return cmd_simulate(sim_flags, out);
    if (*estimate_cmd) return cmd_estimate(est_flags, out, err);
    if (*oracle) return cmd_oracle(oracle_flags, out);
    if (*verify) return cmd_verify(verify_flags, out);
  } catch (const SimulationAbort& e) {
    err << "simulation aborted: " << e.what() << "\n";
    return kExitSimulationAbort;
  } catch (const ResourceLimit& e) {
    err << "resource bound exceeded: " << e.what() << "\n";
    return kExitResourceLimit;
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace brwld
