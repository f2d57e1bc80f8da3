#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace secoda {

// Minimal RFC 4180 reader. Fields may be quoted; quoted fields may
// contain commas, doubled quotes and line breaks. Accepts LF and CRLF
// endings. Tracks the physical line each record starts on so callers
// can report positions.
class CsvReader {
 public:
  explicit CsvReader(std::string text);

  // Reads the next record into fields. Returns false at end of input.
  // The record's starting line (1-based) is written to line.
  bool next(std::vector<std::string>& fields, size_t& line);

 private:
  std::string text_;
  size_t pos_ = 0;
  size_t line_ = 1;
};

// Reads a whole file into memory. Throws IoError when unreadable.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Appends a CSV record, quoting fields only when required.
void append_csv_record(std::string& out,
                       const std::vector<std::string>& fields);

// Strict full-string parse of a real number. Accepts an optional leading
// '+', decimal and scientific notation, and the spellings accepted by
// std::from_chars (including inf/nan). Leading or trailing junk,
// including whitespace, fails the parse.
std::optional<double> parse_double(std::string_view text);

// Shortest representation that round-trips through parse_double.
std::string format_double(double value);

}  // namespace secoda
