#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tailbound {

/// Commands understood by run(): conjugate, entropy, bound, sum-bound, verify.
bool is_command(const std::string& command);

/// Fills defaults and validates a run configuration. The result is what
/// every JSON report embeds. Throws a configuration error on unknown keys,
/// unknown ids or out-of-range values.
nlohmann::json resolve_config(const std::string& command, const nlohmann::json& config);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned threads = 0;  ///< 0: TAILBOUND_THREADS or 1
};

struct RunResult {
  int status = 0;
  std::vector<std::filesystem::path> files;
  std::string error_line;  ///< "error[CODE]: message" on failure
};

/// Executes one command. Errors never escape: they become a nonzero status
/// and a single-line message, and files written so far are removed.
/// `verify` returns status 1 when any threshold fails domination.
RunResult run(const std::string& command, const nlohmann::json& config, const RunOptions& options,
              std::ostream& log);

/// Reads the JSON config at `config_path` and calls run().
RunResult run_file(const std::string& command, const std::filesystem::path& config_path,
                   const RunOptions& options, std::ostream& log);

}  // namespace tailbound
