#include "morsebif/csv.hpp"

#include <cmath>
#include <cstdio>

namespace morsebif {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    // Prefer the shortest representation that round-trips.
    for (int prec = 1; prec <= 16; ++prec) {
        char cand[40];
        std::snprintf(cand, sizeof(cand), "%.*g", prec, x);
        double back = 0.0;
        std::sscanf(cand, "%lf", &back);
        if (back == x || (std::isnan(back) && std::isnan(x))) return cand;
    }
    return buf;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void CsvWriter::comment(const std::string& key, const std::string& value) {
    os_ << "# " << key << ": " << value << "\n";
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    for (size_t i = 0; i < columns.size(); ++i) {
        if (i) os_ << ",";
        os_ << columns[i];
    }
    os_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) os_ << ",";
        os_ << format_double(values[i]);
    }
    os_ << "\n";
}

}  // namespace morsebif
