#include "pathcast/csv.hpp"

#include "pathcast/common.hpp"

namespace pathcast {

std::size_t CsvTable::col(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  std::string have;
  for (const auto& h : header) have += (have.empty() ? "" : ",") + h;
  fail_validation("missing column '" + name + "' (header: " + have + ")");
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvTable t;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    if (!line.empty()) {
      auto cells = split(line, ',');
      for (auto& c : cells) c = trim(c);
      if (t.header.empty()) {
        t.header = std::move(cells);
      } else {
        if (cells.size() != t.header.size())
          fail_validation(origin + ": line " + format_int(line_no) + " has " +
                          format_int(static_cast<std::int64_t>(cells.size())) + " cells, expected " +
                          format_int(static_cast<std::int64_t>(t.header.size())));
        t.rows.push_back(std::move(cells));
        t.line_numbers.push_back(line_no);
      }
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  if (t.header.empty()) fail_validation(origin + ": empty file, header required");
  return t;
}

CsvTable read_csv(const std::filesystem::path& p) {
  return parse_csv(read_file(p), p.string());
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ += ',';
    out_ += header[i];
  }
  out_ += '\n';
}

void CsvWriter::add_row(std::vector<std::string> cells) {
  if (cells.size() != width_) fail_runtime("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    out_ += cells[i];
  }
  out_ += '\n';
}

}  // namespace pathcast
