#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "doctest.h"
#include "lorentzlab/app/cli.hpp"
#include "lorentzlab/app/commands.hpp"
#include "lorentzlab/app/config.hpp"
#include "lorentzlab/error.hpp"
#include "lorentzlab/parallel.hpp"

using namespace lorentzlab;
using namespace lorentzlab::app;

namespace {

const std::filesystem::path kConfigs = LORENTZLAB_CONFIG_DIR;

struct CliRun {
  int code = 0;
  std::string out, err;
};

// Runs the CLI with stdout and stderr captured.
CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lorentzlab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  int code = run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "lorentzlab_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::filesystem::path write(const std::string& name, const std::string& text) {
  auto p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

Json parsed(const CliRun& r) { return Json::parse(r.out); }

const char* kTorus = R"toml([model]
kind = "minkowski"
dim = 4
coords = ["t", "x", "y", "z"]

[mesh]
params = ["u", "v"]
nodes = [16, 16]
length = ["2*pi", "2*pi"]

[immersion]
map = ["0", "u", "v", "0"]
)toml";

}  // namespace

TEST_CASE("toml and json configs load into the same tree") {
  auto a = parse_toml("x = 1\n[s]\nv = [\"a\", \"b\"]\nf = 0.5\n", "a.toml");
  auto b = parse_json(R"({"x": 1, "s": {"v": ["a", "b"], "f": 0.5}})", "b.json");
  // toml tables come back with sorted keys
  CHECK(nlohmann::json::parse(a.dump()) == nlohmann::json::parse(b.dump()));
}

TEST_CASE("malformed TOML reports the line") {
  try {
    parse_toml("a = 1\nb = [1, 2\nc = 3\n", "bad.toml");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string what = e.what();
    CHECK(what.find("bad.toml:") == 0);
    CHECK(what.find(":3:") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_json("{\n\"a\": }", "bad.json"), ConfigError);
  auto path = write("broken.toml", "[model]\nkind = \"minkowski\"\ndim = = 4\n");
  auto r = cli({"classify", "--config", path.string()});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("broken.toml:3") != std::string::npos);
}

TEST_CASE("sections reject unknown keys and bad values") {
  Json j = Json::parse(R"({"a": 1, "b": "2*pi", "extra": true})");
  Section s(j, "top");
  CHECK(s.integer("a") == 1);
  CHECK(s.number("b") == doctest::Approx(2 * M_PI));
  CHECK_THROWS_AS(s.finish(), ConfigError);
  Section t(j, "top");
  CHECK_THROWS_AS(t.string("a"), ConfigError);
  CHECK_THROWS_AS(t.number("missing"), ConfigError);

  auto cfg = parse_toml(std::string(kTorus) + "[tolerances]\ncausal = 1e-8\nspeed = 3\n", "x.toml");
  auto r = run_command("classify", cfg, {});
  CHECK(r.exit_code == kExitConfig);
  CHECK(r.report["error"]["message"].get<std::string>().find("speed") != std::string::npos);
  CHECK(run_command("no-such-command", cfg, {}).exit_code == kExitConfig);
}

TEST_CASE("reports carry the schema and command") {
  auto r = run_command("classify", parse_toml(kTorus, "t.toml"), {});
  CHECK(r.exit_code == kExitOk);
  auto it = r.report.begin();
  CHECK(it.key() == "schema");
  CHECK(*it == "v1");
  CHECK(r.report["command"] == "classify");
  CHECK(r.report["classification"]["tag"] == "extremal");
  REQUIRE(r.artifacts.size() == 1);
  CHECK(r.artifacts[0].content.rfind("node,u,v,H_t,H_x,H_y,H_z,norm_squared,class\n", 0) == 0);
}

TEST_CASE("cli examples and exit codes") {
  auto a = cli({"classify", "--config", (kConfigs / "classify_minkowski_torus.toml").string()});
  CHECK(a.code == kExitOk);
  CHECK(parsed(a)["classification"]["tag"] == "extremal");

  auto b = cli({"solve", "--config", (kConfigs / "solve_infeasible.toml").string()});
  CHECK(b.code == kExitOk);
  CHECK(parsed(b)["result"]["verdict"] == "infeasible_by_necessary_condition");

  auto c = cli({"graph", "--config", (kConfigs / "graph_null.toml").string()});
  CHECK(c.code == kExitHypothesis);
  CHECK(parsed(c)["error"]["kind"] == "hypothesis");

  auto nonconvergent = write("stuck.toml", R"toml([model]
kind = "standard_static"
coords = ["t", "x", "y"]
h = "1"
g0 = [["1", "0"], ["0", "1"]]

[mesh]
params = ["x", "y"]
nodes = [16, 16]
length = [1, 1]

[problem]
domain = "closed"
H = "5*sin(2*pi*x)"
max_newton = 1
)toml");
  CHECK(cli({"solve", "--config", nonconvergent.string()}).code == kExitNonconvergent);

  CHECK(cli({"classify"}).code == kExitConfig);
  CHECK(cli({"classify", "--config", "/nonexistent/x.toml"}).code == kExitConfig);
  CHECK(cli({"classify", "--config", (kConfigs / "classify_minkowski_torus.toml").string(), "--threads", "0"}).code ==
        kExitConfig);
  auto bad_ext = write("config.yaml", "a: 1\n");
  CHECK(cli({"classify", "--config", bad_ext.string()}).code == kExitConfig);
}

TEST_CASE("cli writes the report and csv dumps") {
  auto dir = scratch("out_classify");
  std::filesystem::remove_all(dir);
  auto r = cli({"classify", "--config", (kConfigs / "classify_sphere.json").string(), "--out", dir.string()});
  CHECK(r.code == kExitOk);
  std::ifstream report(dir / "report.json");
  std::stringstream text;
  text << report.rdbuf();
  CHECK(text.str() == r.out);
  CHECK(std::filesystem::exists(dir / "mean_curvature.csv"));
}

TEST_CASE("reports are byte-identical for 1, 2 and 8 threads") {
  for (const char* cmd : {"identities", "symmetry", "solve"}) {
    std::string file = std::string(cmd) == "identities" ? "identities_tilted_torus.toml"
                       : std::string(cmd) == "symmetry" ? "symmetry_splitted.toml"
                                                        : "solve_rigidity.toml";
    auto config = load_config(kConfigs / file);
    std::vector<std::string> dumps;
    for (std::size_t t : {1u, 2u, 8u}) {
      set_thread_count(t);
      auto r = run_command(cmd, config, {kConfigs, std::nullopt});
      std::string all = dump_report(r.report);
      for (const auto& a : r.artifacts) all += a.content;
      dumps.push_back(all);
    }
    set_thread_count(1);
    CHECK(dumps[0] == dumps[1]);
    CHECK(dumps[0] == dumps[2]);
  }
}

TEST_CASE("seed override changes randomized runs only through the seed") {
  auto config = load_config(kConfigs / "symmetry_euler.toml");
  auto a = run_command("symmetry", config, {kConfigs, 5});
  auto b = run_command("symmetry", config, {kConfigs, std::nullopt});
  auto c = run_command("symmetry", config, {kConfigs, 6});
  CHECK(dump_report(a.report) == dump_report(b.report));
  CHECK(dump_report(a.report) != dump_report(c.report));
}

TEST_CASE("gridded inputs are read from csv") {
  auto grid = write("grid_u.csv", [] {
    std::ostringstream os;
    os << "node,x,y,u\n";
    int node = 0;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) os << node++ << "," << i / 8.0 << "," << j / 8.0 << "," << 0.25 << "\n";
    return os.str();
  }());
  auto cfg = parse_toml(R"toml([model]
kind = "standard_static"
coords = ["t", "x", "y"]
h = "1"
g0 = [["1", "0"], ["0", "1"]]

[mesh]
params = ["x", "y"]
nodes = [8, 8]
length = [1, 1]

[graph]
u = "@u"
grid = "grid_u.csv"
laplacian = "none"
)toml",
                        "g.toml");
  auto r = run_command("graph", cfg, {grid.parent_path(), std::nullopt});
  CHECK(r.exit_code == kExitOk);
  CHECK(r.report["mean_curvature"]["max_abs"] == 0.0);
  cfg["graph"]["u"] = "@missing";
  CHECK(run_command("graph", cfg, {grid.parent_path(), std::nullopt}).exit_code == kExitConfig);
}
