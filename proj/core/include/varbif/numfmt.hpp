#pragma once

#include <string>
#include <vector>

namespace varbif {

/// Shortest round-trip decimal form of a double; locale independent.
std::string format_double(double value);

std::string join_doubles(const std::vector<double>& values, char sep = ',');

/// Parses a real number, accepting the tokens `pi`, `<x>*pi` and `<x>pi`.
/// Throws ConfigError on malformed input.
double parse_real(const std::string& text);

}  // namespace varbif
