#include "table.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mdiqkd {

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw std::invalid_argument("table needs columns");
}

void Table::add_row(std::vector<Cell> cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("row arity does not match the column count");
  rows_.push_back(std::move(cells));
}

const std::string& Table::column_name(std::size_t col) const {
  return columns_.at(col);
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return i;
  throw std::out_of_range("no column named " + name);
}

const Table::Cell& Table::cell(std::size_t row, std::size_t col) const {
  return rows_.at(row).at(col);
}

double Table::number(std::size_t row, std::size_t col) const {
  const Cell& c = cell(row, col);
  if (const double* v = std::get_if<double>(&c)) return *v;
  throw std::invalid_argument("cell holds text, not a number");
}

double Table::number(std::size_t row, const std::string& column) const {
  return number(row, column_index(column));
}

std::string Table::format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string Table::text(std::size_t row, std::size_t col) const {
  const Cell& c = cell(row, col);
  if (const double* v = std::get_if<double>(&c)) return format_number(*v);
  return std::get<std::string>(c);
}

namespace {
// Values are numbers and simple tokens; quote only if a delimiter sneaks in.
std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}
}  // namespace

void Table::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (c) out << ',';
    out << csv_escape(columns_[c]);
  }
  out << '\n';
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (c) out << ',';
      out << csv_escape(text(r, c));
    }
    out << '\n';
  }
}

std::string Table::to_csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

std::string Table::to_json() const {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    nlohmann::ordered_json row;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      const Cell& cell = rows_[r][c];
      if (const double* v = std::get_if<double>(&cell)) {
        row[columns_[c]] = *v;
      } else {
        row[columns_[c]] = std::get<std::string>(cell);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows.dump(2);
}

}  // namespace mdiqkd
