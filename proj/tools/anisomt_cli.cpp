// anisomt command line driver: one subcommand per invocation.
//   anisomt_cli <subcommand> [--config <path>] [--out <dir>] [--seed <u64>]
#include <cstdint>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "anisomt/experiments.hpp"

int main(int argc, char** argv) {
  using namespace anisomt;
  CLI::App app{"Anisotropic Moser-Trudinger experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ANISOMT_VERSION);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int n_max = 12;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : subcommand_names()) {
    auto* s = app.add_subcommand(name);
    s->add_option("--config", config_path, "TOML config file")->check(CLI::ExistingFile);
    s->add_option("--out", out_dir, "output directory (default runs/<subcommand>)");
    s->add_option("--seed", seed, "seed overriding the config");
    if (name == "identities") s->add_option("--n-max", n_max, "largest n to check")->check(CLI::Range(2, 200));
    subs[name] = s;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  RunRequest req;
  for (const auto& [name, s] : subs)
    if (s->parsed()) {
      req.subcommand = name;
      if (s->count("--seed")) req.seed = seed;
      if (name == "identities" && s->count("--n-max")) req.n_max = n_max;
    }
  req.out = out_dir.empty() ? std::filesystem::path("runs") / req.subcommand : std::filesystem::path(out_dir);
  try {
    if (!config_path.empty()) {
      req.config = Config::load(config_path);
      req.config_path = config_path;
    }
  } catch (const Error& e) {
    fmt::print(stderr, "{}: {}\n", errc_name(e.code()), e.what());
    return kExitConfig;
  }

  const auto res = run_experiment(req);
  if (res.exit_code != kExitOk) {
    fmt::print(stderr, "{} failed: {}\n", req.subcommand, res.error);
  } else {
    for (const auto& a : res.artifacts) fmt::print(stderr, "wrote {}/{} ({} bytes)\n", req.out.string(), a.file, a.bytes);
  }
  return res.exit_code;
}
