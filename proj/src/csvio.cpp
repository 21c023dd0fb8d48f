#include "qmem/csvio.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qmem/errors.hpp"

namespace qmem {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw NumericError("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot read " + path.string());
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            first = false;
            bool numeric = true;
            std::vector<double> values;
            for (const auto& c : cells) {
                try {
                    std::size_t used = 0;
                    values.push_back(std::stod(c, &used));
                    if (used != c.size()) numeric = false;
                } catch (...) {
                    numeric = false;
                }
            }
            if (!numeric) {
                table.header = cells;
                continue;
            }
            table.rows.push_back(values);
            continue;
        }
        std::vector<double> values;
        values.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                values.push_back(std::stod(c));
            } catch (...) {
                throw ParameterError("non-numeric cell in " + path.string() + ": " + c);
            }
        }
        table.rows.push_back(values);
    }
    return table;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot read " + path.string());
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[8192];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char out[20];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(hash));
    return out;
}

}  // namespace qmem
