#pragma once

// Run configuration and the check-kernel / verify / sweep commands behind the
// command-line tool.

#include "fracop/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fracop {

/// Exit codes: 0 all pass, 1 some inequality or certificate failed, 2 config
/// error, 3 some scenario skipped because its hypotheses were not certified.
enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitConfig = 2, kExitGated = 3 };

inline constexpr const char* kConfigMajorVersion = "1";
inline constexpr const char* kOutDirEnv = "FRACOP_OUT_DIR";

struct RunConfig {
  std::string version;
  std::string output_dir = "fracop-out";
  Thresholds thresholds;
  std::vector<std::uint64_t> seeds;
  std::vector<nlohmann::json> scenarios;  // parsed lazily so errors name the scenario
  std::vector<nlohmann::json> kernels;
  nlohmann::json sweep = nlohmann::json::object();
  std::string text;  // verbatim config

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  std::vector<Scenario> build_scenarios() const;
};

/// --out beats the environment variable, which beats output_dir.
std::string resolve_output_dir(const RunConfig& cfg, const std::string& cli_out);

int cmd_check_kernel(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_verify(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, const std::string& axis, const std::string& out_dir,
              std::ostream& out, std::ostream& log);

/// Exit code of a finished verify run.
int verify_exit_code(const std::vector<InequalityReport>& reports);

}  // namespace fracop
