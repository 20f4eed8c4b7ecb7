#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace calderon::report {

/// "calderon <project version>".
const char* version();

/// Rows of named real columns plus metadata, written as CSV with
/// `# meta: key=value` header lines.
struct ExperimentReport {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::string> warnings;

  void add_meta(std::string key, std::string value);
  void add_summary(std::string key, double value);
  std::optional<double> summary_value(const std::string& key) const;
  void add_row(std::vector<double> row);
  std::vector<double> column(const std::string& name) const;

  void write_csv(std::ostream& os) const;
};

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace calderon::report
