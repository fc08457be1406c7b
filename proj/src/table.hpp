#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace mdiqkd {

// Column-labelled result table. Numbers serialize with 17 significant
// digits so CSV output round-trips bit-exactly.
class Table {
 public:
  using Cell = std::variant<double, std::string>;

  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<Cell> cells);  // throws on arity mismatch

  std::size_t rows() const { return rows_.size(); }
  std::size_t columns() const { return columns_.size(); }
  const std::string& column_name(std::size_t col) const;
  std::size_t column_index(const std::string& name) const;  // throws if absent

  const Cell& cell(std::size_t row, std::size_t col) const;
  double number(std::size_t row, std::size_t col) const;  // throws on text cell
  double number(std::size_t row, const std::string& column) const;
  std::string text(std::size_t row, std::size_t col) const;  // serialized form

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  std::string to_json() const;

  static std::string format_number(double value);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace mdiqkd
