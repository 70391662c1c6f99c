#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace delaykf {

/// Shortest decimal representation that round-trips a double exactly.
std::string format_double(double v);
std::string format_int(long long v);
std::string format_uint(std::uint64_t v);

/// Minimal CSV emitter. Cells are written verbatim; callers format numbers
/// through format_double so re-parsing recovers identical values.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path);

    void write_row(const std::vector<std::string>& cells);

  private:
    std::ofstream out_;
};

}  // namespace delaykf
