#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "flexwing/errors.hpp"

namespace flexwing {

// Floating-point cell with 17 significant digits (lossless round trip).
inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Write-then-rename so partial runs never leave truncated files behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw SolverError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw SolverError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

class CsvBuilder {
public:
    explicit CsvBuilder(std::vector<std::string> header) : columns_(header.size()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) body_ += ',';
            body_ += header[i];
        }
        body_ += '\n';
    }

    CsvBuilder& cell(const std::string& s) {
        if (cell_index_) body_ += ',';
        body_ += s;
        ++cell_index_;
        return *this;
    }
    CsvBuilder& cell(double v) { return cell(csv_num(v)); }
    CsvBuilder& cell(int v) { return cell(std::to_string(v)); }
    CsvBuilder& cell(long v) { return cell(std::to_string(v)); }

    void end_row() {
        if (cell_index_ != columns_)
            throw SolverError("csv row has " + std::to_string(cell_index_) + " cells, expected " +
                              std::to_string(columns_));
        body_ += '\n';
        cell_index_ = 0;
    }

    void write(const std::filesystem::path& path) const {
        if (cell_index_ != 0) throw SolverError("csv has an unterminated row");
        write_file_atomic(path, body_);
    }

    const std::string& str() const { return body_; }

private:
    std::size_t columns_;
    std::size_t cell_index_ = 0;
    std::string body_;
};

}  // namespace flexwing
