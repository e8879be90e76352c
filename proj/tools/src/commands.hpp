#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace varbif::cli {

struct RunConfig {
  std::string problem;
  std::string config_path;
  /// `name=value` builtin parameter overrides.
  std::vector<std::string> params;
  /// `n` or `nx,ny`; empty selects the config value or the default.
  std::string resolution;
  std::string window;
  std::optional<double> lambda_star;
  /// `a:b:step` or a comma-separated list.
  std::string grid;
  std::string out = "out";
  std::string format = "csv";
  unsigned long long seed = 1;
  int workers = 1;
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand. Returns 0 on success, 1 on domain errors and 2 on
/// configuration errors; messages go to `err`.
int run(const std::string& subcommand, const RunConfig& config, std::ostream& out, std::ostream& err);

/// Inclusive range `a:b:step` or a comma list of reals.
std::vector<double> parse_grid(const std::string& text);

}  // namespace varbif::cli
