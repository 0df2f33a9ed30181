#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace morsebif {

/// Shortest round-trip decimal form of a double; deterministic across runs.
std::string format_double(double x);

/// FNV-1a 64-bit hash (deterministic everywhere, unlike std::hash).
std::uint64_t fnv1a(std::string_view s);

/// Writes CSV with a leading comment block of "# key: value" lines.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void comment(const std::string& key, const std::string& value);
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);

private:
    std::ostream& os_;
};

}  // namespace morsebif
