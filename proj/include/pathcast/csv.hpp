#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pathcast {

// Minimal CSV support for the fixed artifact schemas: comma separated, no
// quoting, one header row. Row line numbers are kept for error reporting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;

  // Column index by name; validation error listing the header when absent.
  std::size_t col(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& p);
CsvTable parse_csv(const std::string& text, const std::string& origin);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  std::string str() const { return out_; }

 private:
  std::string out_;
  std::size_t width_;
};

}  // namespace pathcast
