#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "anisomt/config.hpp"
#include "anisomt/error.hpp"

namespace anisomt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

const std::vector<std::string>& subcommand_names();

struct RunRequest {
  std::string subcommand;
  Config config;
  std::string config_path;  // empty when defaults only
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;  // overrides the config
  std::optional<int> n_max;           // identities
};

struct Artifact {
  std::string file;  // relative to the output directory
  std::uintmax_t bytes = 0;
  std::uint32_t crc32 = 0;
};

struct RunResult {
  int exit_code = kExitOk;
  std::vector<Artifact> artifacts;
  std::string error;  // "Code: message" on failure
};

// Runs one subcommand. Writes its artifacts, then manifest.json (and error.json on
// failure) into req.out. Library errors are mapped onto exit codes, not rethrown.
RunResult run_experiment(const RunRequest& req);

// Exit code for a library error code: bad input -> 1, numerical failure -> 2.
int exit_code_for(Errc c);

std::uint32_t file_crc32(const std::filesystem::path& p);

}  // namespace anisomt
