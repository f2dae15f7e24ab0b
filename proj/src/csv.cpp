#include "dms/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dms/error.hpp"

namespace dms {

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return columns.at(i);
  }
  throw InvalidArgument("csv: no column named \"" + name + "\"");
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const CsvTable& table) {
  if (table.columns.size() != table.header.size()) {
    throw InvalidArgument("csv: header and column count differ");
  }
  const std::size_t n = table.rows();
  for (const auto& c : table.columns) {
    if (c.size() != n) throw InvalidArgument("csv: ragged columns");
  }
  for (const auto& c : table.comments) out << "# " << c << '\n';
  for (std::size_t j = 0; j < table.header.size(); ++j) out << (j ? "," : "") << table.header[j];
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      out << (j ? "," : "") << format_double(table.columns[j][i]);
    }
    out << '\n';
  }
}

void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("csv: cannot open " + path.string() + " for writing");
  write_csv(out, table);
  if (!out) throw InvalidArgument("csv: write failed for " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t row) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("csv: row " + std::to_string(row) + ": not a number: \"" + s + "\"");
  }
  return x;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line.rfind('#', 0) == 0) {
        t.comments.push_back(line.rfind("# ", 0) == 0 ? line.substr(2) : line.substr(1));
        continue;
      }
      t.header = split(line);
      t.columns.assign(t.header.size(), {});
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    ++row;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw InvalidArgument("csv: row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(t.header.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) t.columns[j].push_back(parse_double(cells[j], row));
  }
  if (!have_header) throw InvalidArgument("csv: missing header row");
  return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("csv: cannot open " + path.string());
  return read_csv(in);
}

}  // namespace dms
