#pragma once

#include <set>
#include <string>
#include <vector>

namespace varbif::cli {

/// CSV text with `# key=value` header lines; numbers via format_double.
class Csv {
 public:
  void comment(const std::string& line);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  void row(const std::vector<double>& values);
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

std::string num(double v);
std::string num(int v);

/// Writes `content` to dir/name, creating dir; returns the path.
std::string write_file(const std::string& dir, const std::string& name, const std::string& content);

/// Splits "csv,json,svg"; throws ConfigError on unknown entries.
std::set<std::string> parse_formats(const std::string& text);

/// Fixed-width text table for terminal output.
std::string text_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

}  // namespace varbif::cli
