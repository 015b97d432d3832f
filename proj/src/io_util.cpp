#include "gener/io_util.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "gener/errors.hpp"

namespace gener {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw GenerError(errc::io_failure, fail_class::data,
                         "cannot open file: " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw GenerError(errc::io_failure, fail_class::data,
                         "read failed: " + path.string());
    return content;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t end = line.find('\t', start);
        if (end == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, end - start));
        start = end + 1;
    }
    return cells;
}

double parse_double(std::string_view cell, std::size_t line_no) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw GenerError(errc::non_numeric, fail_class::data,
                         "non-numeric cell '" + std::string(cell) + "' on line " +
                             std::to_string(line_no));
    return value;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

StagedWriter::~StagedWriter() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [tmp, final] : staged_) std::filesystem::remove(tmp, ec);
}

void StagedWriter::write(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
        throw GenerError(errc::io_failure, fail_class::data,
                         "cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out)
        throw GenerError(errc::io_failure, fail_class::data, "write failed: " + tmp.string());
    out.close();
    staged_.emplace_back(tmp, path);
}

void StagedWriter::commit() {
    for (const auto& [tmp, final] : staged_) {
        std::error_code ec;
        std::filesystem::rename(tmp, final, ec);
        if (ec)
            throw GenerError(errc::io_failure, fail_class::data,
                             "rename failed: " + tmp.string() + " -> " + final.string());
    }
    committed_ = true;
}

}  // namespace gener
