#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gener {

std::string read_file(const std::filesystem::path& path);

// Splits on '\n', tolerating '\r\n'; a trailing empty line is dropped.
std::vector<std::string_view> split_lines(std::string_view text);

std::vector<std::string_view> split_tabs(std::string_view line);

double parse_double(std::string_view cell, std::size_t line_no);  // throws NonNumeric

// Formats with 17 significant digits so a re-parse reproduces the exact value.
std::string format_double(double v);

// Staged output: every file is written to <path>.tmp and renamed into place
// only when commit() runs, so failed commands leave no partial outputs.
class StagedWriter {
public:
    ~StagedWriter();

    void write(const std::filesystem::path& path, std::string_view content);
    void commit();

private:
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;
    bool committed_ = false;
};

}  // namespace gener
