#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "brwld/cli.hpp"
#include "brwld/errors.hpp"
#include "brwld/io.hpp"
#include "brwld/rates.hpp"
#include "brwld/svg.hpp"

using namespace brwld;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("brwld_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "brwld");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const TempDir& dir, const std::string& name, const Json& j) {
  const fs::path p = dir.path / name;
  write_text(p, j.dump(2));
  return p;
}

Json lattice_model() {
  return Json::parse(R"({"offspring": {"0": 0.25, "2": 0.75}, "step": {"h": 1.0, "pmf": {"-1": 0.5, "1": 0.5}}})");
}

Json stretched_model() {
  return Json::parse(R"({"offspring": {"1": 0.5, "2": 0.5}, "step": {"r": 0.5, "lambda_plus": 1.0, "lambda_minus": 1.0}})");
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(1e300) == "1e+300");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_rate(RateValue::infinity()) == "inf");
  CHECK(format_optional(std::nullopt) == "nan");
}

TEST_CASE("CSV writer and checker") {
  CsvTable t({"a", "b"});
  t.add_row({"1", "2"});
  CHECK(t.str() == "a,b\n1,2\n");
  CHECK(check_csv(t.str()).empty());
  CHECK_FALSE(check_csv("a,b\n1\n").empty());
  CHECK_FALSE(check_csv("a,b\n1,\n").empty());
  CHECK_FALSE(check_csv("a,b\n1,2").empty());
  CHECK_FALSE(check_csv("").empty());
  CHECK_THROWS(t.add_row({"1"}));
}

TEST_CASE("model parsing") {
  const Json m = lattice_model();
  const OffspringLaw law = parse_offspring(m["offspring"]);
  CHECK(law.mean() == doctest::Approx(1.5));
  CHECK(parse_offspring(offspring_to_json(law)).mean() == law.mean());
  const StepModel lat = parse_step(m["step"]);
  CHECK(std::holds_alternative<LatticeStepLaw>(lat));
  const StepModel st = parse_step(stretched_model()["step"]);
  REQUIRE(std::holds_alternative<StepLaw>(st));
  CHECK(std::get<StepLaw>(st).r() == 0.5);
  CHECK(step_to_json(st) == stretched_model()["step"]);

  CHECK_THROWS_AS(parse_offspring(Json::parse(R"({"x": 1.0})")), ValidationError);
  CHECK_THROWS_AS(parse_step(Json::parse(R"({"r": 0.5, "lambda_plus": 1})")), ValidationError);
  CHECK_THROWS_AS(reject_unknown_keys(Json::parse(R"({"a": 1, "b": 2})"), "cfg", {"a"}), ValidationError);
  CHECK_NOTHROW(reject_unknown_keys(Json::parse(R"({"a": 1})"), "cfg", {"a", "b"}));
  CHECK_THROWS_AS(json_number(Json::parse(R"({"a": "x"})"), "a", "cfg"), ValidationError);
  CHECK_THROWS_AS(json_integer(Json::parse(R"({"a": 1.5})"), "a", "cfg"), ValidationError);
}

TEST_CASE("SVG marks infinite stretches as dashed") {
  const ModelParams b(validate_offspring({{2, 0.5}, {3, 0.5}}), make_centered(0.5, 1.0, 1.0));
  const std::vector<double> xs{-1.0, 0.0, 0.5, 1.5, 2.0, 3.0};
  const std::vector<RateCurve> curves{rate_curve(b, RateKind::IIND, xs), rate_curve(b, RateKind::IBRW, xs)};
  const std::string svg = render_rate_svg(curves, "test");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  CHECK(svg.find("IIND") != std::string::npos);

  const std::vector<RateCurve> finite{rate_curve(b, RateKind::IBRW, xs)};
  CHECK(render_rate_svg(finite, "finite").find("stroke-dasharray") == std::string::npos);
}

TEST_CASE("cli: usage errors exit 2") {
  CHECK(run({}).code == kExitConfigError);
  CHECK(run({"frobnicate"}).code == kExitConfigError);
  TempDir dir("usage");
  CHECK(run({"rates", "--config", (dir.path / "missing.json").string()}).code == kExitConfigError);

  Json bad = Json::parse(R"({"rates": {"kinds": ["I"], "x_grid": [0.0]}, "bogus": 1})");
  bad["model"] = stretched_model();
  CHECK(run({"rates", "--config", write_config(dir, "bad.json", bad).string(), "--out", dir.path.string()}).code ==
        kExitConfigError);
}

TEST_CASE("cli: rates") {
  TempDir dir("rates");
  Json cfg = Json::parse(R"({"rates": {"kinds": ["I", "IBRW", "IIND", "H"], "x_grid": [-1.0, 0.0, 0.1, "alpha"]}})");
  cfg["model"] = stretched_model();
  const fs::path path = write_config(dir, "rates.json", cfg);
  const auto r = run({"rates", "--config", path.string(), "--out", (dir.path / "a").string()});
  REQUIRE(r.code == kExitOk);
  const std::string csv = read_text(dir.path / "a" / "rates.csv");
  CHECK(csv.rfind("x,value,kind\n", 0) == 0);
  CHECK(check_csv(csv).empty());
  CHECK(fs::exists(dir.path / "a" / "rates.svg"));
  const Json manifest = Json::parse(read_text(dir.path / "a" / "manifest.json"));
  CHECK(manifest["command"] == "rates");

  REQUIRE(run({"rates", "--config", path.string(), "--out", (dir.path / "b").string(), "--workers", "3"}).code == kExitOk);
  CHECK(read_text(dir.path / "b" / "rates.csv") == csv);
  CHECK(read_text(dir.path / "b" / "manifest.json") == read_text(dir.path / "a" / "manifest.json"));

  // Boettcher laws produce infinite independent-walks rates below alpha.
  Json boettcher = Json::parse(R"({"rates": {"kinds": ["IIND"], "x_grid": [0.0, 2.0]}})");
  boettcher["model"] = stretched_model();
  boettcher["model"]["offspring"] = Json::parse(R"({"2": 0.5, "3": 0.5})");
  REQUIRE(run({"rates", "--config", write_config(dir, "b.json", boettcher).string(), "--out", (dir.path / "c").string()})
              .code == kExitOk);
  CHECK(read_text(dir.path / "c" / "rates.csv").find("0,inf,IIND") != std::string::npos);
}

TEST_CASE("cli: simulate, overrides and abort") {
  TempDir dir("simulate");
  Json cfg = Json::parse(R"({"simulate": {"n": 4, "replicas": 200, "process": "brw", "condition_on_survival": true}})");
  cfg["model"] = lattice_model();
  const fs::path path = write_config(dir, "sim.json", cfg);
  REQUIRE(run({"simulate", "--config", path.string(), "--out", (dir.path / "a").string(), "--seed", "5"}).code == kExitOk);
  const std::string csv = read_text(dir.path / "a" / "simulate.csv");
  CHECK(csv.rfind("replica,survived,Mn,Zn\n", 0) == 0);
  CHECK(check_csv(csv).empty());
  REQUIRE(run({"simulate", "--config", path.string(), "--out", (dir.path / "b").string(), "--seed", "5", "--workers", "2"})
              .code == kExitOk);
  CHECK(read_text(dir.path / "b" / "simulate.csv") == csv);
  REQUIRE(run({"simulate", "--config", path.string(), "--out", (dir.path / "c").string(), "--seed", "6"}).code == kExitOk);
  CHECK(read_text(dir.path / "c" / "simulate.csv") != csv);

  REQUIRE(run({"simulate", "--config", path.string(), "--out", (dir.path / "d").string(), "--set", "simulate.replicas=10"})
              .code == kExitOk);
  CHECK(check_csv(read_text(dir.path / "d" / "simulate.csv")).empty());

  Json dead = cfg;
  dead["model"]["offspring"] = Json::parse(R"({"0": 1.0})");
  CHECK(run({"simulate", "--config", write_config(dir, "dead.json", dead).string(), "--out", (dir.path / "e").string()})
            .code == kExitSimulationAbort);
}

TEST_CASE("cli: estimate validates before running") {
  TempDir dir("estimate");
  Json cfg = Json::parse(R"({"estimate": {"n": 3, "replicas": 10, "events": [{"side": "upper", "x": 1.0, "process": "brw"}]}})");
  cfg["model"] = stretched_model();
  CHECK(run({"estimate", "--config", write_config(dir, "few.json", cfg).string(), "--out", dir.path.string()}).code ==
        kExitConfigError);

  cfg["estimate"]["replicas"] = 300;
  const auto ok = run({"estimate", "--config", write_config(dir, "ok.json", cfg).string(), "--out", (dir.path / "a").string()});
  REQUIRE(ok.code == kExitOk);
  const std::string csv = read_text(dir.path / "a" / "estimate.csv");
  CHECK(csv.rfind("n,x,kind,p_hat,ci_low,ci_high,empirical_rate,analytic_rate\n", 0) == 0);
  CHECK(csv.find("brw_upper") != std::string::npos);
}

TEST_CASE("cli: oracle") {
  TempDir dir("oracle");
  Json cfg = Json::parse(R"({"oracle": {"n": 0, "process": "brw", "conditional": false}})");
  cfg["model"] = lattice_model();
  REQUIRE(run({"oracle", "--config", write_config(dir, "o.json", cfg).string(), "--out", dir.path.string()}).code == kExitOk);
  CHECK(read_text(dir.path / "oracle.csv") == "x,cdf\n-1,0\n0,1\n1,1\n");
  CHECK(Json::parse(read_text(dir.path / "oracle.json"))["n"] == 0);

  cfg["oracle"]["n"] = 6'000'000;
  CHECK(run({"oracle", "--config", write_config(dir, "big.json", cfg).string(), "--out", dir.path.string()}).code ==
        kExitResourceLimit);

  Json stretched = cfg;
  stretched["model"] = stretched_model();
  stretched["oracle"]["n"] = 2;
  CHECK(run({"oracle", "--config", write_config(dir, "s.json", stretched).string(), "--out", dir.path.string()}).code ==
        kExitConfigError);
}
