#include "delaykf/csv.hpp"

#include <cstdio>
#include <cstdlib>

#include "delaykf/errors.hpp"

namespace delaykf {

std::string format_double(double v) {
    char buf[64];
    for (int precision = 1; precision <= 16; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_int(long long v) {
    return std::to_string(v);
}

std::string format_uint(std::uint64_t v) {
    return std::to_string(v);
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open for writing: " + path);
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
    if (!out_) throw IoError("write failure");
}

}  // namespace delaykf
