#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hotspot {

std::string trim(const std::string& s);

// Quoted fields may contain commas and doubled quotes; fields are trimmed.
std::vector<std::string> split_csv_line(const std::string& line);

// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(const std::string& field);

std::optional<double> parse_double(const std::string& s);

// Header-indexed reader. Skips blank lines and lines starting with '#'.
class CsvReader {
 public:
  // Throws SchemaError when the header is missing.
  explicit CsvReader(std::istream& in);

  bool next();  // advances to the next data row
  std::size_t line() const { return line_; }
  bool has(const std::string& column) const { return index_.count(column) > 0; }
  // Throws SchemaError for an unknown column; empty string for a short row.
  const std::string& field(const std::string& column) const;
  void require(const std::vector<std::string>& columns) const;

 private:
  std::istream& in_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> row_;
  std::size_t line_ = 0;
};

}  // namespace hotspot
