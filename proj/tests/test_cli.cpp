#include "fracop/cli.hpp"
#include "fracop/error.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace fracop;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("fracop_test_cli_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FRACOP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kZeroScenario = R"({
  "version": "1.0.0",
  "scenarios": [{
    "name": "zero-coifman", "scenario": "coifman",
    "operator": {"preset": "fractional-ricci-sjogren", "a": 0.5, "alpha": 0.25},
    "family": {"functions": [{"preset": "zero"}]},
    "grid": {"dim": 1, "box": [-4, 4], "N": 64}
  }]
})";

}  // namespace

TEST_CASE("degenerate matrix family fails hypothesis (H)") {
  const auto cfg = RunConfig::parse(R"({
    "version": "1.0.0",
    "kernels": [{"factors": [{"alpha_i": 0.5}, {"alpha_i": 0.5}], "matrices": [1, 1]}]
  })");
  std::ostringstream log;
  const auto dir = scratch("h");
  CHECK(cmd_check_kernel(cfg, dir.string(), log) == kExitFail);
  CHECK(log.str().find("hypothesis (H) violated") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "kernels.json"));
  CHECK(j[0]["pass"] == false);
  std::filesystem::remove_all(dir);
}

TEST_CASE("check-kernel passes the preset kernels") {
  const auto cfg = RunConfig::parse(R"({
    "version": "1.0.0",
    "kernels": [{"preset": "ricci-sjogren", "alpha": 0.5},
                {"preset": "fractional-ricci-sjogren", "a": 0.5, "alpha": 0.25},
                {"preset": "riesz", "alpha": 0.5}]
  })");
  std::ostringstream log;
  const auto dir = scratch("ck");
  CHECK(cmd_check_kernel(cfg, dir.string(), log) == kExitPass);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(RunConfig::parse("{not json"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse(R"({"scenarios": []})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse(R"({"version": "2.0.0"})"), ConfigError);
  const auto cfg = RunConfig::parse(R"({"version": "1.0.0",
    "scenarios": [{"name": "broken", "scenario": "coifman", "operator": {"preset": "nope"}}]})");
  try {
    cfg.build_scenarios();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("broken") != std::string::npos);
  }
}

TEST_CASE("verify exit codes") {
  std::ostringstream log;
  const auto dir = scratch("verify");
  CHECK(cmd_verify(RunConfig::parse(R"({"version": "1.0.0", "scenarios": []})"), dir.string(), log) ==
        kExitPass);
  CHECK(cmd_verify(RunConfig::parse(kZeroScenario), dir.string(), log) == kExitPass);
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(j["config_echo"].get<std::string>() == kZeroScenario);
  CHECK(j["reports"][0]["status"] == "pass");

  InequalityReport gated;
  InequalityReport failed;
  failed.pass = false;
  InequalityReport passed;
  passed.pass = true;
  CHECK(verify_exit_code({passed}) == kExitPass);
  CHECK(verify_exit_code({passed, gated}) == kExitGated);
  CHECK(verify_exit_code({gated, failed}) == kExitFail);
  std::filesystem::remove_all(dir);
}

TEST_CASE("output directory precedence") {
  const auto cfg = RunConfig::parse(R"({"version": "1.0.0", "output_dir": "from-config"})");
  unsetenv(kOutDirEnv);
  CHECK(resolve_output_dir(cfg, "") == "from-config");
  setenv(kOutDirEnv, "from-env", 1);
  CHECK(resolve_output_dir(cfg, "") == "from-env");
  CHECK(resolve_output_dir(cfg, "from-flag") == "from-flag");
  unsetenv(kOutDirEnv);
}

TEST_CASE("sweep") {
  const std::string base = R"({
    "version": "1.0.0",
    "scenarios": [{
      "name": "c", "scenario": "coifman",
      "operator": {"preset": "fractional-ricci-sjogren", "a": 0.5, "alpha": 0.25},
      "family": {"functions": [{"preset": "indicator", "params": [-1, 1]}],
                 "weights": [{"preset": "constant"}], "symbols": [{"preset": "arctan"}]},
      "grid": {"dim": 1, "box": [-4, 4], "N": 64}
    }],
    "sweep": {"scenario": "c", "grid": [32, 64, 128], "p": [2], "alpha": []}
  })";
  const auto cfg = RunConfig::parse(base);
  const auto dir = scratch("sweep");
  std::ostringstream out, log;

  auto rows = [](const std::string& csv) {
    std::vector<std::string> lines;
    std::istringstream in(csv);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    return lines;
  };

  SUBCASE("singleton axis gives one row") {
    CHECK(cmd_sweep(cfg, "p", dir.string(), out, log) == kExitPass);
    CHECK(rows(out.str()).size() == 2);
  }
  SUBCASE("grid axis gives one row per value with a trend") {
    CHECK(cmd_sweep(cfg, "grid", dir.string(), out, log) == kExitPass);
    const auto r = rows(out.str());
    REQUIRE(r.size() == 4);
    CHECK(r[1].find("grid,32,c,32,ok,") == 0);
    CHECK(r[1].back() == ',');
    for (int i : {2, 3}) {
      const auto trend = r[i].substr(r[i].rfind(',') + 1);
      CHECK((trend == "up" || trend == "down" || trend == "flat"));
    }
    CHECK(slurp(dir / "sweep_grid.csv") == out.str());
  }
  SUBCASE("empty or missing axes are config errors") {
    CHECK_THROWS_AS(cmd_sweep(cfg, "alpha", dir.string(), out, log), ConfigError);
    CHECK_THROWS_AS(cmd_sweep(cfg, "lambda", dir.string(), out, log), ConfigError);
    CHECK_THROWS_AS(cmd_sweep(cfg, "tau", dir.string(), out, log), ConfigError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("command-line binary exit codes") {
  const auto dir = scratch("bin");
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name, std::ios::binary) << body;
    return (dir / name).string();
  };
  const auto out = (dir / "out").string();
  CHECK(run_cli("verify --config " + write("bad.json", "{\"version\": ") + " --out " + out) == 2);
  CHECK(run_cli("verify --config " + (dir / "missing.json").string() + " --out " + out) == 2);
  CHECK(run_cli("verify --config " + write("zero.json", kZeroScenario) + " --out " + out) == 0);
  CHECK(std::filesystem::exists(dir / "out" / "report.json"));
  CHECK(std::filesystem::exists(dir / "out" / "ratios.csv"));
  const auto degenerate = write("h.json", R"({"version": "1.0.0",
    "kernels": [{"factors": [{"alpha_i": 0.5}, {"alpha_i": 0.5}], "matrices": [1, 1]}]})");
  CHECK(run_cli("check-kernel --config " + degenerate + " --out " + out) == 1);

  setenv(kOutDirEnv, (dir / "env").c_str(), 1);
  CHECK(run_cli("verify --config " + (dir / "zero.json").string()) == 0);
  CHECK(std::filesystem::exists(dir / "env" / "report.json"));
  unsetenv(kOutDirEnv);
  std::filesystem::remove_all(dir);
}
