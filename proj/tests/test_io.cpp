#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "linf/error.hpp"
#include "linf/io.hpp"
#include "linf/scenario.hpp"

using namespace linf;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "linf_unit";
  fs::create_directories(d);
  return d / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json minimal() {
  return json{{"schema", kScenarioSchema}, {"kind", "kahler"}, {"grid", {{"n", 2}, {"N", 8}}}};
}
}  // namespace

TEST_SUITE("io") {

TEST_CASE("doubles round-trip") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 1e21, 0.0}) {
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("csv tables") {
  CsvTable t({"a", "b"});
  t.add_row(std::vector<double>{1.0, 0.25});
  t.add_row(std::vector<std::string>{"x", "y"});
  CHECK(t.str() == "a,b\n1,0.25\nx,y\n");
  CHECK_THROWS(t.add_row(std::vector<double>{1.0}));
}

TEST_CASE("snapshots") {
  const TorusGrid g(2, 8);
  const ScalarField f = random_trig_field(g, 1, 4, 2);
  const fs::path p = scratch("snap.bin");
  write_snapshot_bin(p, g, f);
  CHECK(fs::file_size(p) == 8 + 8 * static_cast<std::uintmax_t>(g.nodes()));
  const Snapshot s = read_snapshot_bin(p);
  CHECK(s.n == 2);
  CHECK(s.N == 8);
  CHECK(s.data == f);
  const fs::path c = scratch("snap.csv");
  write_snapshot_csv(c, g, f);
  const std::string text = slurp(c);
  CHECK(std::count(text.begin(), text.end(), '\n') == g.nodes() + 1);
}

TEST_CASE("svg plots") {
  PlotSpec ps;
  ps.title = "t";
  ps.log_x = true;
  ps.series.push_back({"s", {0.1, 0.5, 1.0}, {0.3, 0.2, 0.1}, true});
  ps.hlines.push_back({"S", 1.5});
  const std::string svg = render_svg(ps);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg == render_svg(ps));
}

}

TEST_SUITE("scenario") {

TEST_CASE("parsing and defaults") {
  const Scenario s = parse_scenario(minimal());
  CHECK(s.n == 2);
  CHECK(s.N == 8);
  CHECK_FALSE(s.R.has_value());
  const Scenario r = parse_scenario(to_json(s));
  CHECK(to_json(r) == to_json(s));
}

TEST_CASE("rejections") {
  json j = minimal();
  j["surprise"] = 1;
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = minimal();
  j["grid"]["M"] = 3;
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = minimal();
  j.erase("schema");
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = minimal();
  j["schema"] = "linf-lab/scenario/v0";
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = minimal();
  j["delta"] = "half";
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = minimal();
  j["grid"]["N"] = 9;
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = minimal();
  j["operator"] = {{"type", "SigmaK"}, {"k", 5}};
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = minimal();
  j["R"] = "auto";
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
}

TEST_CASE("empty sweep list is a configuration error") {
  json j = minimal();
  j["kind"] = "sweep";
  const Scenario s = parse_scenario(j);
  CHECK_THROWS_AS(run_sweep(s, scratch("")), ConfigError);
}

TEST_CASE("scenario fields") {
  const TorusGrid g(2, 8);
  MetricSpec m;
  m.type = "diagonal";
  m.t = 0.25;
  m.exponent = 2.0;
  CHECK(make_metric(m, g).at(5)(0, 0).real() == doctest::Approx(0.0625));
  m.type = "perturbed";
  m.amplitude = 0.4;
  const HermitianMetricField p = make_metric(m, g);
  double lo = 10, hi = 0;
  for (std::int64_t i = 0; i < g.nodes(); ++i) {
    lo = std::min(lo, p.at(i)(0, 0).real());
    hi = std::max(hi, p.at(i)(0, 0).real());
  }
  CHECK(std::max(1.0 - lo, hi - 1.0) == doctest::Approx(0.4));
  FieldSpec f;
  f.constant = 0.1;
  f.amplitude = 0.2;
  const ScalarField F = make_F(f, g);
  CHECK((F.array() - 0.1).abs().maxCoeff() == doctest::Approx(0.2));
}

TEST_CASE("check pipeline follows the c >= 2 threshold") {
  json j = minimal();
  j["chi"] = {{"scale", 3.0}};
  j["certificate"] = {{"kind", "delta_tilde"}};
  CHECK(run_check(parse_scenario(j), scratch("")).exit_code == 0);
  j["chi"] = {{"scale", 1.5}};
  const RunResult r = run_check(parse_scenario(j), scratch(""));
  CHECK(r.exit_code == 1);
  CHECK(r.summary["delta_tilde"]["worst_value"].get<double>() > 1.0);
}

}

TEST_SUITE("scenario") {

TEST_CASE("a single-member sweep reproduces verify") {
  json j = minimal();
  j["F"] = {{"amplitude", 0.15}, {"seed", 11}};
  j["certificate"] = {{"kind", "delta_R"}, {"directions", 64}};
  j["aux"] = {{"s_fractions", {0.0}}, {"k_list", {10}}, {"psh_samples", 3}, {"v_samples", 1}};
  const RunResult v = run_verify(parse_scenario(j), scratch(""));
  j["kind"] = "sweep";
  j["metric"] = {{"type", "diagonal"}, {"exponent", 1.0}};
  j["sweep"] = {{"t_list", {1.0}}};
  const RunResult s = run_sweep(parse_scenario(j), scratch(""));
  REQUIRE(s.summary["rows"].size() == 1);
  CHECK(s.summary["rows"][0]["sup_neg_phi"].get<double>() == v.summary["sup_neg_phi"].get<double>());
  CHECK(s.summary["rows"][0]["residual"].get<double>() == v.summary["residual_sup"].get<double>());
}

}
