#pragma once

#include <string>
#include <vector>

namespace quorum {

// Shortest decimal representation that parses back to exactly v.
std::string format_double(double v);

// Writes content to path via a temp file in the same directory plus rename,
// so readers never observe a partial file. Creates parent directories.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

// Minimal CSV assembly; fields are joined with commas, rows with '\n'.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void add_row(const std::vector<std::string>& fields);
    const std::string& text() const { return text_; }

private:
    std::size_t columns_;
    std::string text_;
};

std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace quorum
