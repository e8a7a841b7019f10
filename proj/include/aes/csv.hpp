#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace aes {

struct CsvRow {
    std::size_t line = 0;  ///< 1-based physical line where the record starts
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;

    /// Index of a header column, or npos.
    std::size_t column(std::string_view name) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// RFC-4180 parser: comma delimiter, double-quote quoting with "" escapes,
/// CRLF or LF records, quoted fields may span lines. The first record is the
/// header. Throws ValidationError naming the line on malformed input.
CsvTable parse_csv(std::string_view text, std::string_view source = "<input>");
CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field only when it contains a delimiter, quote or line break.
std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

/// %.17g decimal; parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

}  // namespace aes
