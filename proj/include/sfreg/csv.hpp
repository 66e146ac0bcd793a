#ifndef SFREG_CSV_HPP
#define SFREG_CSV_HPP

#include <string>
#include <vector>

#include "sfreg/types.hpp"

namespace sfreg {

// Round-trippable number formatting for machine-read files.
std::string format_full(double v);
// 6 significant digits, for logs and human-facing summaries.
std::string format_human(double v);

struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  // rows[i] has exactly header.size() fields; original file line of row i is
  // line_numbers[i] (1-based, header is line 1 unless blank lines precede it).
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  // Column index for name, or throws IngestError naming the missing column.
  std::size_t column(const std::string& name) const;
};

// Reads a comma-separated file. Fields are plain (no quoting or embedded
// commas in any format we produce or ingest); surrounding whitespace is
// trimmed. Blank lines are skipped. Every data row must match the header
// width or an IngestError with the offending line number is thrown.
CsvTable read_csv(const std::string& path);

// Parses a field as double (empty not allowed); throws IngestError with the
// file/line/column context on failure.
double parse_double(const CsvTable& t, std::size_t row, std::size_t col);

// Writes rows of preformatted fields; caller formats numbers.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace sfreg

#endif  // SFREG_CSV_HPP
