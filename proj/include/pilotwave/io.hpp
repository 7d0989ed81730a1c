#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pilotwave::io {

/// Shortest round-trip decimal form of a double ("%.17g"); integers print
/// without a decimal point. Non-finite values print as nan / inf / -inf.
std::string format_number(double v);

/// In-memory CSV table; the bytes depend only on the values written.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void row(std::initializer_list<double> values);
    void row(std::span<const double> values);
    void row_text(const std::vector<std::string>& cells);
    std::size_t rows() const noexcept { return rows_; }
    const std::string& str() const noexcept { return text_; }

private:
    std::size_t columns_;
    std::size_t rows_ = 0;
    std::string text_;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

struct FileRecord {
    std::string name;  ///< relative to the output directory
    std::string sha256;
    std::uint64_t bytes = 0;
};

/// Output directory that keeps an inventory of every file written into it.
class OutputDir {
public:
    explicit OutputDir(std::filesystem::path root);
    const std::filesystem::path& root() const noexcept { return root_; }
    void write(const std::string& name, std::string_view content);
    const std::vector<FileRecord>& files() const noexcept { return files_; }

private:
    std::filesystem::path root_;
    std::vector<FileRecord> files_;
};

}  // namespace pilotwave::io
