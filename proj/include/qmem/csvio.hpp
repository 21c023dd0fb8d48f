#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qmem {

// Numbers are written with %.17g so artifacts are bit-stable for equal
// inputs regardless of locale or stream state.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Reads a numeric CSV; a single header line of non-numeric labels is allowed.
CsvTable read_csv(const std::filesystem::path& path);

// FNV-1a content digest, hex-encoded; stable across platforms.
std::string file_digest(const std::filesystem::path& path);

}  // namespace qmem
