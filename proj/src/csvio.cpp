#include "granular/csvio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "granular/errors.hpp"
#include "granular/version.hpp"

namespace granular::io {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_number(const std::string& field, const std::string& path, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
        return v;
    } catch (const std::exception&) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": bad numeric field '" +
                              field + "'");
    }
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

Table load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (table.columns.empty()) {
            for (auto& c : split_fields(t)) {
                std::string lower = c;
                std::transform(lower.begin(), lower.end(), lower.begin(),
                               [](unsigned char ch) { return std::tolower(ch); });
                table.columns.push_back(lower);
            }
            continue;
        }
        const auto fields = split_fields(t);
        if (fields.size() != table.columns.size())
            throw ValidationError(path + ":" + std::to_string(line_no) + ": ragged row (" +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(table.columns.size()) + ")");
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_number(f, path, line_no));
        table.rows.push_back(std::move(row));
    }
    if (table.columns.empty()) throw ValidationError(path + ": missing header row");
    return table;
}

} // namespace

Series load_series(const std::string& path) {
    const Table table = load_table(path);
    if (table.columns != std::vector<std::string>{"time", "value"})
        throw ValidationError(path + ": expected header 'time,value'");
    if (table.rows.empty()) throw ValidationError(path + ": empty series");
    std::vector<std::size_t> order(table.rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return table.rows[a][0] < table.rows[b][0];
    });
    Series series;
    for (std::size_t idx : order) {
        const double t = table.rows[idx][0];
        if (!series.times.empty() && t == series.times.back())
            throw ValidationError(path + ": duplicate time " + format_double(t));
        series.times.push_back(t);
        series.values.push_back(table.rows[idx][1]);
    }
    return series;
}

std::vector<double> load_wealth_list(const std::string& path) {
    const Table table = load_table(path);
    std::size_t size_column;
    if (table.columns == std::vector<std::string>{"size"}) {
        size_column = 0;
    } else if (table.columns == std::vector<std::string>{"rank", "size"}) {
        size_column = 1;
    } else {
        throw ValidationError(path + ": expected header 'size' or 'rank,size'");
    }
    std::vector<double> sizes;
    for (const auto& row : table.rows) {
        const double s = row[size_column];
        if (!(s > 0)) throw ValidationError(path + ": sizes must be > 0");
        sizes.push_back(s);
    }
    if (sizes.empty()) throw ValidationError(path + ": empty wealth list");
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    return sizes;
}

CsvWriter::CsvWriter(const std::string& path) : path_(path), out_(path) {
    if (!out_) throw ValidationError("cannot open " + path + " for writing");
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << "\n"; }

void CsvWriter::provenance(std::uint64_t seed, const std::string& scenario_hash) {
    out_ << "# " << kToolName << " v" << kToolVersion << " seed=" << seed
         << " scenario=" << scenario_hash << "\n";
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out_ << ',';
        out_ << columns[i];
    }
    out_ << "\n";
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << "\n"; }

void CsvWriter::append_field(std::string& line, double v) { line += format_double(v); }
void CsvWriter::append_field(std::string& line, const std::string& v) { line += v; }
void CsvWriter::append_field(std::string& line, const char* v) { line += v; }
void CsvWriter::append_field(std::string& line, std::int64_t v) { line += std::to_string(v); }
void CsvWriter::append_field(std::string& line, std::uint64_t v) { line += std::to_string(v); }
void CsvWriter::append_field(std::string& line, int v) { line += std::to_string(v); }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace granular::io
