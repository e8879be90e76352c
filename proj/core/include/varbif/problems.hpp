#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "varbif/assembly.hpp"

namespace varbif {

using ParamMap = std::map<std::string, double>;

struct ReferenceDatum {
  std::string quantity;
  std::string value;
  /// Which independent oracle produced the value.
  std::string provenance;
};

struct ParamInfo {
  std::string name;
  double default_value = 0.0;
  std::string meaning;
};

struct BuiltinProblem {
  std::string name;
  std::string summary;
  ProblemSpec spec;
  ParamMap params;
  std::vector<ReferenceDatum> references;
};

std::vector<std::string> builtin_names();
std::vector<ParamInfo> builtin_parameters(const std::string& name);

/// Throws ConfigError for unknown names or parameters.
BuiltinProblem builtin(const std::string& name, const ParamMap& params = {},
                       const std::optional<Domain>& domain = std::nullopt);

/// F = (a/2)|Du|^2 + sum_k f_k u^k and K = sum_k g_k u^k on one component.
ProblemSpec polynomial_problem(const Domain& domain, double grad_coefficient,
                               const std::vector<double>& f_poly, const std::vector<double>& k_poly,
                               Symmetry symmetry = Symmetry::none);

}  // namespace varbif
