#include "calderon/report.hpp"

#include <charconv>
#include <ostream>

#include "calderon/error.hpp"

namespace calderon::report {

const char* version() { return "calderon " CALDERON_VERSION; }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void ExperimentReport::add_meta(std::string key, std::string value) {
  meta.emplace_back(std::move(key), std::move(value));
}

void ExperimentReport::add_summary(std::string key, double value) { summary.emplace_back(std::move(key), value); }

std::optional<double> ExperimentReport::summary_value(const std::string& key) const {
  for (const auto& [k, v] : summary)
    if (k == key) return v;
  return std::nullopt;
}

void ExperimentReport::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) fail(ErrorKind::invariant, "report row width does not match the columns");
  rows.push_back(std::move(row));
}

std::vector<double> ExperimentReport::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] != name) continue;
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
  fail(ErrorKind::precondition, "no report column named " + name);
}

void ExperimentReport::write_csv(std::ostream& os) const {
  os << "# meta: version=" << version() << '\n';
  if (!kind.empty()) os << "# meta: experiment=" << kind << '\n';
  for (const auto& [k, v] : meta) os << "# meta: " << k << '=' << v << '\n';
  for (const auto& [k, v] : summary) os << "# meta: summary." << k << '=' << format_double(v) << '\n';
  for (const auto& w : warnings) os << "# warning: " << w << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << format_double(r[c]);
    os << '\n';
  }
}

}  // namespace calderon::report
