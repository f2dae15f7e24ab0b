#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dms {

/// Column-major numeric table. Comment lines are written before the header,
/// each prefixed with "# ".
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  /// Column by header name; throws InvalidArgument if absent.
  const std::vector<double>& column(const std::string& name) const;
};

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

/// Comma-separated, header row, newline after every row. An empty table
/// produces a header-only file.
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::filesystem::path& path, const CsvTable& table);

/// Reads the format written by write_csv. Lines starting with '#' before the
/// header are returned as comments with the "# " prefix removed.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

}  // namespace dms
