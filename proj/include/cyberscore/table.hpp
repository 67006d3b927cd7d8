// Delimited-table I/O shared by every loader and report writer.
//
// Readers skip blank lines and lines starting with '#'; the first remaining
// line is the header. Writers emit a provenance comment line, then the header,
// then rows. Fields never contain the delimiter, so no quoting is done.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cyber {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line per row

    // Index of a named column; throws std::runtime_error naming the column.
    std::size_t column(std::string_view name) const;
    bool has_column(std::string_view name) const;
};

// A row-level problem found while loading; loading continues past these.
struct RowIssue {
    std::size_t line = 0;
    std::string message;
};

CsvTable parse_delimited(std::istream& in, char delim = ',');
CsvTable read_delimited(const std::filesystem::path& path, char delim = ',');

std::vector<std::string> split(std::string_view line, char delim);
std::string_view trim(std::string_view s);

// Shortest representation that round-trips to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);  // throws std::invalid_argument

class TableWriter {
public:
    explicit TableWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row);
    std::size_t size() const { return rows_.size(); }

    // `provenance` becomes a leading "# ..." line when nonempty.
    void write(std::ostream& out, std::string_view provenance = {}, char delim = ',') const;
    void write(const std::filesystem::path& path, std::string_view provenance = {}, char delim = ',') const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace cyber
