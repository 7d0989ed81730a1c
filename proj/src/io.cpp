#include "pilotwave/io.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "pilotwave/errors.hpp"

namespace pilotwave::io {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // folds -0
    return fmt::format("{:.17g}", v);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    if (header.empty()) throw PreconditionError("CSV header must not be empty");
    row_text(header);
    rows_ = 0;
}

void CsvWriter::row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != columns_) throw PreconditionError("CSV row width does not match the header");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) text_ += ',';
        text_ += format_number(values[i]);
    }
    text_ += '\n';
    ++rows_;
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw PreconditionError("CSV row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        text_ += cells[i];
    }
    text_ += '\n';
    ++rows_;
}

std::string sha256_hex(std::string_view bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw Error("SHA-256 computation failed");
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out.flush()) throw Error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw Error("cannot create output directory " + root_.string() + ": " + ec.message());
}

void OutputDir::write(const std::string& name, std::string_view content) {
    write_file_atomic(root_ / name, content);
    FileRecord rec{name, sha256_hex(content), content.size()};
    for (auto& f : files_)
        if (f.name == name) {
            f = rec;
            return;
        }
    files_.push_back(std::move(rec));
}

}  // namespace pilotwave::io
