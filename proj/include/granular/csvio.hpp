#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace granular::io {

struct Series {
    std::vector<double> times;
    std::vector<double> values;
};

// CSV with header `time,value`, sorted by time on load. Duplicate times and
// non-finite entries are rejected; comment lines (#) are skipped.
Series load_series(const std::string& path);

// CSV with header `size` or `rank,size`; positive sizes, sorted descending.
std::vector<double> load_wealth_list(const std::string& path);

// CSV writer that stamps every file with the tool/seed/scenario header every
// output embeds.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    void comment(const std::string& text);
    void provenance(std::uint64_t seed, const std::string& scenario_hash);
    void header(const std::vector<std::string>& columns);
    void raw_row(const std::string& line);
    template <typename... Ts>
    void row(Ts... fields) {
        std::string line;
        append(line, fields...);
        raw_row(line);
    }
    const std::string& path() const { return path_; }

private:
    static void append_field(std::string& line, double v);
    static void append_field(std::string& line, const std::string& v);
    static void append_field(std::string& line, const char* v);
    static void append_field(std::string& line, std::int64_t v);
    static void append_field(std::string& line, std::uint64_t v);
    static void append_field(std::string& line, int v);

    template <typename T, typename... Rest>
    static void append(std::string& line, T first, Rest... rest) {
        append_field(line, first);
        if constexpr (sizeof...(rest) > 0) {
            line.push_back(',');
            append(line, rest...);
        }
    }

    std::string path_;
    std::ofstream out_;
};

std::string format_double(double v);

} // namespace granular::io
