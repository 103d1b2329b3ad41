// SVG plots from result CSV files. Every plotted point carries its source
// row and the CSV strings it was drawn from.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ghzrep {

enum class ReportKind { Heatmap, Curve, Tradeoff };
ReportKind report_kind_from_string(const std::string& s);
std::string to_string(ReportKind k);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int column(const std::string& name) const;  // -1 when absent
};
CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable load_csv(const std::string& path);

// Columns each report kind needs.
std::vector<std::string> required_columns(ReportKind k);

// Throws ConfigError naming every absent column.
std::string render_report(const CsvTable& t, ReportKind k, const std::string& source);

}  // namespace ghzrep
