#include "hotspot/csv.hpp"

#include <cmath>

#include "hotspot/errors.hpp"

namespace hotspot {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

CsvReader::CsvReader(std::istream& in) : in_(in) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line_ == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto header = split_csv_line(t);
    for (std::size_t k = 0; k < header.size(); ++k) index_[header[k]] = k;
    return;
  }
  throw SchemaError("CSV input has no header row");
}

bool CsvReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    row_ = split_csv_line(t);
    return true;
  }
  return false;
}

const std::string& CsvReader::field(const std::string& column) const {
  static const std::string kEmpty;
  const auto it = index_.find(column);
  if (it == index_.end()) throw SchemaError("CSV column '" + column + "' not present");
  return it->second < row_.size() ? row_[it->second] : kEmpty;
}

void CsvReader::require(const std::vector<std::string>& columns) const {
  for (const auto& c : columns) {
    if (!has(c)) throw SchemaError("CSV missing required column '" + c + "'");
  }
}

}  // namespace hotspot
