#include "aes/csv.hpp"

#include <cerrno>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "aes/error.hpp"

namespace aes {

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    return npos;
}

namespace {

std::string where(std::string_view source, std::size_t line) {
    std::ostringstream os;
    os << source << ":" << line;
    return os.str();
}

}  // namespace

CsvTable parse_csv(std::string_view text, std::string_view source) {
    CsvTable table;
    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> record_lines;

    std::vector<std::string> fields;
    std::string field;
    std::size_t line = 1;
    std::size_t record_line = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();
    bool any_in_record = false;

    // Strip a UTF-8 byte order mark.
    if (text.substr(0, 3) == "\xEF\xBB\xBF") {
        i = 3;
    }

    auto end_record = [&] {
        fields.push_back(std::move(field));
        field.clear();
        const bool blank = fields.size() == 1 && fields[0].empty() && !any_in_record;
        if (!blank) {
            records.push_back(std::move(fields));
            record_lines.push_back(record_line);
        }
        fields.clear();
        any_in_record = false;
    };

    while (i < n) {
        const char c = text[i];
        if (c == '"' && field.empty()) {
            any_in_record = true;
            ++i;
            const std::size_t open_line = line;
            bool closed = false;
            while (i < n) {
                const char q = text[i];
                if (q == '"') {
                    if (i + 1 < n && text[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                if (q == '\n') {
                    ++line;
                }
                field.push_back(q);
                ++i;
            }
            if (!closed) {
                throw ValidationError(where(source, open_line) + ": unterminated quoted field");
            }
            if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                throw ValidationError(where(source, line) + ": unexpected character after closing quote");
            }
            continue;
        }
        if (c == ',') {
            any_in_record = true;
            fields.push_back(std::move(field));
            field.clear();
            ++i;
            continue;
        }
        if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
                ++i;
            }
            ++i;
            end_record();
            ++line;
            record_line = line;
            continue;
        }
        if (c == '"') {
            throw ValidationError(where(source, line) + ": quote inside unquoted field");
        }
        any_in_record = true;
        field.push_back(c);
        ++i;
    }
    if (any_in_record || !field.empty()) {
        end_record();
    }

    if (records.empty()) {
        throw ValidationError(std::string(source) + ": missing header row");
    }
    table.header = std::move(records.front());
    const std::size_t width = table.header.size();
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != width) {
            std::ostringstream os;
            os << where(source, record_lines[r]) << ": expected " << width << " fields, found "
               << records[r].size();
            throw ValidationError(os.str());
        }
        table.rows.push_back(CsvRow{record_lines[r], std::move(records[r])});
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    return parse_csv(read_file(path), path.string());
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i != 0) {
            out << ',';
        }
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view s, std::string_view what) {
    std::string tmp(s);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(tmp.c_str(), &end);
    // Underflow to a subnormal or zero is accepted; overflow is not.
    if (tmp.empty() || end != tmp.c_str() + tmp.size() || (errno == ERANGE && std::isinf(v))) {
        throw ValidationError("invalid number '" + tmp + "' for " + std::string(what));
    }
    return v;
}

long long parse_int(std::string_view s, std::string_view what) {
    long long v = 0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (first != last && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc() || ptr != last) {
        throw ValidationError("invalid integer '" + std::string(s) + "' for " + std::string(what));
    }
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) {
        throw IoError("read failed: " + path.string());
    }
    return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) {
            end = text.size();
        }
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out.push_back('\n');
    }
    write_file(path, out);
}

}  // namespace aes
