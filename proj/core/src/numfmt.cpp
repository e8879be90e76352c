#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <system_error>

#include "varbif/errors.hpp"
#include "varbif/numfmt.hpp"

namespace varbif {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string join_doubles(const std::vector<double>& values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(sep);
    out += format_double(values[i]);
  }
  return out;
}

namespace {

bool parse_plain(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

double parse_real(const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  if (parse_plain(s, v)) return v;
  const std::string suffixes[] = {"*pi", "pi"};
  for (const auto& suffix : suffixes) {
    if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      const std::string head = s.substr(0, s.size() - suffix.size());
      if (head.empty() || head == "+") return std::numbers::pi;
      if (head == "-") return -std::numbers::pi;
      if (parse_plain(head, v)) return v * std::numbers::pi;
    }
  }
  throw ConfigError("cannot parse '" + text + "' as a real number");
}

}  // namespace varbif
