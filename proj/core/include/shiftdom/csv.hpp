#pragma once

#include <string>
#include <vector>

namespace shiftdom {

// Deterministic CSV assembly: fixed header, caller-ordered rows, no quoting.
// Cells are numbers, fractions or flags; a cell with a comma or newline is a
// caller bug and is rejected outright.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<std::string>& cells);
  const std::string& str() const { return out_; }

 private:
  void append_line(const std::vector<std::string>& cells);

  std::size_t arity_;
  std::string out_;
};

} // namespace shiftdom
