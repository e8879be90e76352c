#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "varbif/config.hpp"
#include "varbif/errors.hpp"
#include "varbif/numfmt.hpp"

namespace varbif {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

int parse_int(const std::string& s) {
  const double v = parse_real(s);
  if (v != static_cast<double>(static_cast<int>(v))) throw ConfigError("'" + s + "' is not an integer");
  return static_cast<int>(v);
}

double ranged(const std::string& key, const std::string& value, double lo, double hi) {
  const double v = parse_real(value);
  if (!(v >= lo && v <= hi))
    throw ConfigError(key + " = " + value + " is outside the safe range [" + format_double(lo) + ", " +
                      format_double(hi) + "]");
  return v;
}

}  // namespace

Domain parse_domain(const std::string& text) {
  const auto w = words(text);
  std::optional<Domain> d;
  if (!w.empty() && w[0] == "interval" && w.size() == 3) d = Domain::interval(parse_real(w[1]), parse_real(w[2]));
  if (!w.empty() && w[0] == "rectangle" && w.size() == 5)
    d = Domain::rectangle(parse_real(w[1]), parse_real(w[2]), parse_real(w[3]), parse_real(w[4]));
  if (d) {
    for (int axis = 0; axis < d->dimension(); ++axis)
      if (!(d->lo[axis] < d->hi[axis])) throw ConfigError("domain '" + text + "' has an empty side");
    return *d;
  }
  throw ConfigError("domain must be 'interval a b' or 'rectangle ax bx ay by', got '" + text + "'");
}

ProblemConfig parse_config(std::istream& in, const std::string& source) {
  ProblemConfig cfg;
  cfg.source = source;
  std::set<std::string> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (value.empty()) throw ConfigError(where + "empty value for key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      if (key == "problem") {
        cfg.problem = value;
      } else if (key == "domain") {
        cfg.domain = parse_domain(value);
      } else if (key == "resolution") {
        const auto w = words(value);
        if (w.size() == 1) {
          const int n = parse_int(w[0]);
          cfg.resolution = std::array<int, 2>{n, n};
        } else if (w.size() == 2) {
          cfg.resolution = std::array<int, 2>{parse_int(w[0]), parse_int(w[1])};
        } else {
          throw ConfigError("resolution must be 'n' or 'nx ny'");
        }
      } else if (key == "components") {
        cfg.components = parse_int(value);
        if (cfg.components != 1) throw ConfigError("only scalar problems (components = 1) are available");
      } else if (key == "symmetry") {
        if (value == "none")
          cfg.symmetry = Symmetry::none;
        else if (value == "odd")
          cfg.symmetry = Symmetry::odd;
        else
          throw ConfigError("symmetry must be 'none' or 'odd'");
      } else if (key == "base_state") {
        if (value != "zero") throw ConfigError("base_state must be 'zero'");
      } else if (key.rfind("param.", 0) == 0 && key.size() > 6) {
        cfg.params[key.substr(6)] = parse_real(value);
      } else if (key == "F.grad2") {
        cfg.grad_coefficient = parse_real(value);
      } else if (key == "F.poly" || key == "K.poly") {
        std::vector<double> c;
        for (const auto& w : words(value)) c.push_back(parse_real(w));
        (key == "F.poly" ? cfg.F_poly : cfg.K_poly) = c;
      } else if (key == "kernel_tol") {
        cfg.kernel_tol = ranged(key, value, 1e-14, 1e-4);
      } else if (key == "ball_radius") {
        cfg.ball_radius = ranged(key, value, 1e-6, 10.0);
      } else if (key == "corrector_tol") {
        cfg.corrector_tol = ranged(key, value, 1e-14, 1e-6);
      } else if (key == "reduced_tol") {
        cfg.reduced_tol = ranged(key, value, 1e-13, 1e-5);
      } else if (key == "lift_tol") {
        cfg.lift_tol = ranged(key, value, 1e-12, 1e-4);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  if (cfg.problem.empty()) throw ConfigError(source + ": missing required key 'problem'");
  const bool poly = cfg.problem == "polynomial";
  if (!poly && (!cfg.F_poly.empty() || !cfg.K_poly.empty() || seen.count("F.grad2")))
    throw ConfigError(source + ": F.poly, K.poly and F.grad2 apply only to problem = polynomial");
  if (poly && !cfg.params.empty())
    throw ConfigError(source + ": param.* keys apply only to builtin problems");
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

ProblemSpec make_problem(const ProblemConfig& config) {
  ProblemSpec spec;
  if (config.problem == "polynomial") {
    if (!config.domain) throw ConfigError(config.source + ": polynomial problems need a domain");
    spec = polynomial_problem(*config.domain, config.grad_coefficient, config.F_poly, config.K_poly,
                              config.symmetry.value_or(Symmetry::none));
  } else {
    spec = builtin(config.problem, config.params, config.domain).spec;
    if (config.symmetry) spec.symmetry = *config.symmetry;
  }
  if (spec.symmetry == Symmetry::odd && !check_odd_symmetry(spec, 32, 7))
    throw ConfigError(config.source + ": symmetry = odd declared but F or K is not even on probes");
  return spec;
}

}  // namespace varbif
