#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "varbif/assembly.hpp"
#include "varbif/problems.hpp"

namespace varbif {

/// Parsed problem configuration file. Format: one `key = value` per line,
/// `#` starts a comment. Keys:
///   problem      builtin name, or `polynomial`
///   domain       `interval a b` | `rectangle ax bx ay by`
///   resolution   `n` or `nx ny`
///   components   1
///   symmetry     `none` | `odd`
///   base_state   `zero`
///   param.NAME   builtin parameter
///   F.grad2      a in F = (a/2)|Du|^2 + ... (polynomial only)
///   F.poly       coefficients f0 f1 f2 ... of sum f_k u^k (polynomial only)
///   K.poly       coefficients of K (polynomial only)
///   kernel_tol, ball_radius, corrector_tol, reduced_tol, lift_tol
/// Numbers accept `pi`, `2pi`, `0.5*pi`.
struct ProblemConfig {
  std::string source = "<input>";
  std::string problem;
  std::optional<Domain> domain;
  std::optional<std::array<int, 2>> resolution;
  int components = 1;
  std::optional<Symmetry> symmetry;
  ParamMap params;
  double grad_coefficient = 1.0;
  std::vector<double> F_poly;
  std::vector<double> K_poly;
  std::optional<double> kernel_tol;
  std::optional<double> ball_radius;
  std::optional<double> corrector_tol;
  std::optional<double> reduced_tol;
  std::optional<double> lift_tol;
};

/// Throws ConfigError with the offending line number.
ProblemConfig parse_config(std::istream& in, const std::string& source = "<input>");
ProblemConfig load_config(const std::string& path);

/// Parses `interval a b` / `rectangle ax bx ay by`.
Domain parse_domain(const std::string& text);

/// Builds the problem; a declared odd symmetry is verified on probes.
ProblemSpec make_problem(const ProblemConfig& config);

}  // namespace varbif
