#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "hpm/errors.hpp"

namespace hpm {

// Shortest round-trip representation; NaN exports as NA so spreadsheet-style
// consumers see an explicit missing marker.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw NumericError("number formatting failed");
    return std::string(buf, p);
}

// Write-to-temp then rename, so concurrent readers and crashed runs never see
// a partial file. The temp file lives in the target directory (rename must not
// cross filesystems).
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path dir = path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out.write(content.data(), std::streamsize(content.size()));
        if (!out) throw ConfigError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw ConfigError("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

struct CsvBuilder {
    std::string text;

    CsvBuilder& raw(const std::string& cell) {
        if (!text.empty() && text.back() != '\n') text += ',';
        text += cell;
        return *this;
    }
    CsvBuilder& num(double v) { return raw(format_number(v)); }
    CsvBuilder& end_row() {
        text += '\n';
        return *this;
    }
};

} // namespace hpm
