#include "granular/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "granular/csvio.hpp"
#include "granular/errors.hpp"
#include "granular/fitkit.hpp"
#include "granular/lattice.hpp"
#include "granular/levy.hpp"
#include "granular/rng.hpp"
#include "granular/stats.hpp"
#include "granular/svg.hpp"
#include "granular/version.hpp"
#include "granular/walk.hpp"

namespace granular::cli {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- parsing

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

struct Entry {
    std::string section; // "" = root
    int section_index = 0;
    std::string key;
    std::string value;
    std::size_t line = 0;
    mutable bool consumed = false;
};

struct RawScenario {
    std::string origin;
    std::vector<Entry> entries;
    int stage_count = 0;
};

RawScenario tokenize(const std::string& text, const std::string& origin,
                     std::vector<std::string>& errors) {
    RawScenario raw;
    raw.origin = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int section_index = 0;
    std::map<std::string, int> section_seen;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                errors.push_back(origin + ":" + std::to_string(line_no) + ": unterminated section header");
                continue;
            }
            section = lower(trim(t.substr(1, t.size() - 2)));
            section_index = section_seen[section]++;
            if (section == "stage") raw.stage_count = section_index + 1;
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back(origin + ":" + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        Entry entry;
        entry.section = section;
        entry.section_index = section_index;
        entry.key = lower(trim(t.substr(0, eq)));
        entry.value = trim(t.substr(eq + 1));
        entry.line = line_no;
        if (entry.key.empty()) {
            errors.push_back(origin + ":" + std::to_string(line_no) + ": empty key");
            continue;
        }
        raw.entries.push_back(std::move(entry));
    }
    return raw;
}

// Reads typed values out of a (section scope, error sink) pair and tracks
// which keys were consumed so leftovers can be reported.
class KeyReader {
public:
    KeyReader(const RawScenario& raw, std::vector<std::string>& errors,
              std::vector<std::string> sections, int stage_index = -1)
        : raw_(raw), errors_(errors), sections_(std::move(sections)), stage_(stage_index) {}

    const Entry* find(const std::string& key) const {
        const Entry* found = nullptr;
        for (const auto& entry : raw_.entries) {
            if (entry.key != key) continue;
            if (!in_scope(entry)) continue;
            found = &entry; // last one wins, like ordinary config files
        }
        if (found) found->consumed = true;
        return found;
    }

    bool has(const std::string& key) const { return find(key) != nullptr; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        const Entry* e = find(key);
        return e ? e->value : fallback;
    }

    double get_double(const std::string& key, double fallback) const {
        const Entry* e = find(key);
        if (!e) return fallback;
        return parse_double(*e);
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        const Entry* e = find(key);
        if (!e) return fallback;
        try {
            std::size_t used = 0;
            const long long v = std::stoll(e->value, &used);
            if (used != e->value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            fail(*e, "expected an integer, got '" + e->value + "'");
            return fallback;
        }
    }

    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
        const Entry* e = find(key);
        if (!e) return fallback;
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(e->value, &used);
            if (used != e->value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            fail(*e, "expected a non-negative integer, got '" + e->value + "'");
            return fallback;
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        const Entry* e = find(key);
        if (!e) return fallback;
        const std::string v = lower(e->value);
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        fail(*e, "expected a boolean, got '" + e->value + "'");
        return fallback;
    }

    std::vector<double> get_vector(const std::string& key) const {
        const Entry* e = find(key);
        if (!e) return {};
        return parse_vector(*e, e->value);
    }

    // segment1 = t_start : row | row | ...
    std::vector<std::pair<double, sectors::GrowthMatrix>> get_segments() const {
        std::vector<std::pair<int, const Entry*>> found;
        for (const auto& entry : raw_.entries) {
            if (!in_scope(entry)) continue;
            if (entry.key.rfind("segment", 0) != 0) continue;
            const std::string suffix = entry.key.substr(7);
            if (suffix.empty() ||
                !std::all_of(suffix.begin(), suffix.end(),
                             [](unsigned char c) { return std::isdigit(c); }))
                continue;
            entry.consumed = true;
            found.emplace_back(std::stoi(suffix), &entry);
        }
        std::sort(found.begin(), found.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::pair<double, sectors::GrowthMatrix>> segments;
        for (const auto& [index, entry] : found) {
            const auto colon = entry->value.find(':');
            if (colon == std::string::npos) {
                fail(*entry, "expected 't_start : row | row | ...'");
                continue;
            }
            double start = 0;
            try {
                start = std::stod(trim(entry->value.substr(0, colon)));
            } catch (const std::exception&) {
                fail(*entry, "bad segment start time");
                continue;
            }
            std::vector<std::vector<double>> rows;
            std::string rest = entry->value.substr(colon + 1);
            std::istringstream rows_in(rest);
            std::string row_text;
            bool row_ok = true;
            while (std::getline(rows_in, row_text, '|')) {
                const auto row = parse_vector(*entry, row_text);
                if (row.empty()) row_ok = false;
                rows.push_back(row);
            }
            if (!row_ok || rows.empty()) {
                fail(*entry, "empty matrix row");
                continue;
            }
            const std::size_t n = rows.size();
            bool square = true;
            for (const auto& row : rows) square = square && row.size() == n;
            if (!square) {
                fail(*entry, "matrix must be square");
                continue;
            }
            try {
                segments.emplace_back(start, sectors::GrowthMatrix::from_rows(rows));
            } catch (const std::exception& ex) {
                fail(*entry, ex.what());
            }
        }
        return segments;
    }

    void fail(const Entry& entry, const std::string& message) const {
        errors_.push_back(raw_.origin + ":" + std::to_string(entry.line) + ": [" +
                          (entry.section.empty() ? "root" : entry.section) + "] " + entry.key +
                          ": " + message);
    }

    void error(const std::string& message) const {
        errors_.push_back(raw_.origin + ": " + message);
    }

    void report_unconsumed() const {
        for (const auto& entry : raw_.entries) {
            if (!in_scope(entry) || entry.consumed) continue;
            fail(entry, "unknown key");
        }
    }

private:
    bool in_scope(const Entry& entry) const {
        if (stage_ >= 0)
            return entry.section == "stage" && entry.section_index == stage_;
        for (const auto& s : sections_)
            if (entry.section == s) return true;
        return false;
    }

    double parse_double(const Entry& entry) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(entry.value, &used);
            if (used != entry.value.size()) throw std::invalid_argument("trailing");
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
            return v;
        } catch (const std::exception&) {
            fail(entry, "expected a number, got '" + entry.value + "'");
            return 0;
        }
    }

    std::vector<double> parse_vector(const Entry& entry, const std::string& text) const {
        std::vector<double> values;
        std::istringstream in(text);
        std::string token;
        while (in >> token) {
            // allow comma-separated as well as whitespace-separated entries
            for (auto& piece : [&] {
                     std::vector<std::string> pieces;
                     std::istringstream ts(token);
                     std::string p;
                     while (std::getline(ts, p, ',')) pieces.push_back(p);
                     return pieces;
                 }()) {
                if (piece.empty()) continue;
                try {
                    values.push_back(std::stod(piece));
                } catch (const std::exception&) {
                    fail(entry, "bad numeric entry '" + piece + "'");
                    return {};
                }
            }
        }
        return values;
    }

    const RawScenario& raw_;
    std::vector<std::string>& errors_;
    std::vector<std::string> sections_;
    int stage_;
};

ScenarioKind parse_kind(const std::string& name, bool& ok) {
    ok = true;
    const std::string k = lower(name);
    if (k == "walk") return ScenarioKind::walk;
    if (k == "lattice") return ScenarioKind::lattice;
    if (k == "levy") return ScenarioKind::levy;
    if (k == "sectors") return ScenarioKind::sectors;
    if (k == "fit") return ScenarioKind::fit;
    if (k == "pipeline") return ScenarioKind::pipeline;
    ok = false;
    return ScenarioKind::walk;
}

void validate_lag_spec(const KeyReader& reader, const std::string& key_name,
                       const std::string& spec, std::int64_t max_allowed) {
    try {
        const auto lags = parse_lag_spec(spec);
        if (max_allowed > 0 && lags.back() > max_allowed)
            reader.error(key_name + ": max lag " + std::to_string(lags.back()) +
                         " exceeds available steps " + std::to_string(max_allowed));
    } catch (const std::exception& ex) {
        reader.error(key_name + ": " + ex.what());
    }
}

WalkParams read_walk(const KeyReader& reader) {
    WalkParams p;
    p.dim = static_cast<int>(reader.get_int("dim", p.dim));
    p.steps = reader.get_int("steps", p.steps);
    p.walkers = reader.get_int("walkers", p.walkers);
    p.lags = reader.get_string("lags", p.lags);
    p.out = reader.get_string("out", p.out);
    if (p.dim < 1 || p.dim > 3) reader.error("walk: dim must be 1, 2 or 3");
    if (p.steps < 1) reader.error("walk: steps must be >= 1");
    if (p.walkers < 1) reader.error("walk: walkers must be >= 1");
    if (p.out.empty()) reader.error("walk: out must be a filename");
    validate_lag_spec(reader, "walk lags", p.lags, p.steps);
    return p;
}

LatticeParams read_lattice(const KeyReader& reader) {
    LatticeParams p;
    p.dims = static_cast<int>(reader.get_int("dims", p.dims));
    p.side = static_cast<int>(reader.get_int("side", p.side));
    p.mean_a = reader.get_double("mean_a", p.mean_a);
    p.k0 = reader.get_uint("k0", p.k0);
    p.s = reader.get_double("s", p.s);
    p.delta = reader.get_double("delta", p.delta);
    p.da = reader.get_double("da", p.da);
    p.dk = reader.get_double("dk", p.dk);
    p.horizon = reader.get_double("horizon", p.horizon);
    p.record = reader.get_double("record", p.record);
    p.ensemble = static_cast<int>(reader.get_int("ensemble", p.ensemble));
    p.well_mixed = reader.get_bool("well_mixed", p.well_mixed);
    p.max_dt = reader.get_double("max_dt", p.max_dt);
    p.out = reader.get_string("out", p.out);
    if (p.dims < 1 || p.dims > 3) reader.error("lattice: dims must be 1, 2 or 3");
    if (p.side < 2) reader.error("lattice: side must be >= 2");
    if (p.mean_a < 0) reader.error("lattice: mean_a must be >= 0");
    if (p.s < 0 || p.delta < 0 || p.da < 0 || p.dk < 0)
        reader.error("lattice: rates must be >= 0 (negative rate)");
    if (!(p.horizon > 0)) reader.error("lattice: horizon must be > 0");
    if (!(p.record > 0)) reader.error("lattice: record must be > 0");
    if (p.ensemble < 1) reader.error("lattice: ensemble must be >= 1");
    if (p.max_dt < 0) reader.error("lattice: max_dt must be >= 0");
    if (p.k0 > lattice::kOverflowGuard) reader.error("lattice: k0 exceeds overflow guard");
    if (p.out.empty()) reader.error("lattice: out must be a filename");
    return p;
}

LevyParams read_levy(const KeyReader& reader) {
    LevyParams p;
    const bool has_alpha = reader.has("alpha");
    const bool has_uniform = reader.has("uniform_bound");
    if (has_alpha && has_uniform)
        reader.error("levy: give either alpha or uniform_bound, not both");
    p.use_uniform = has_uniform;
    p.alpha = reader.get_double("alpha", p.alpha);
    p.uniform_bound = reader.get_double("uniform_bound", p.uniform_bound);
    p.scale = reader.get_double("scale", p.scale);
    p.steps = reader.get_int("steps", p.steps);
    p.paths = reader.get_int("paths", p.paths);
    p.lags = reader.get_string("lags", p.lags);
    p.out = reader.get_string("out", p.out);
    p.plot = reader.get_string("plot", p.plot);
    p.series_out = reader.get_string("series_out", p.series_out);
    p.series_steps = reader.get_int("series_steps", p.series_steps);
    p.series_scale = reader.get_double("series_scale", p.series_scale);
    if (!p.use_uniform && !(p.alpha > 0)) reader.error("levy: alpha must be > 0");
    if (p.use_uniform && !(p.uniform_bound > 0)) reader.error("levy: uniform_bound must be > 0");
    if (!(p.scale > 0)) reader.error("levy: scale must be > 0");
    if (p.steps < 1) reader.error("levy: steps must be >= 1");
    if (p.paths < 1) reader.error("levy: paths must be >= 1");
    if (p.series_steps < 0) reader.error("levy: series_steps must be >= 0");
    if (!(p.series_scale > 0)) reader.error("levy: series_scale must be > 0");
    if (p.out.empty()) reader.error("levy: out must be a filename");
    validate_lag_spec(reader, "levy lags", p.lags, p.steps);
    return p;
}

SectorsParams read_sectors(const KeyReader& reader) {
    SectorsParams p;
    p.n = static_cast<int>(reader.get_int("n", 0));
    p.k0 = reader.get_vector("k0");
    p.t_end = reader.get_double("t_end", 0);
    p.dt = reader.get_double("dt", 0);
    p.segments = reader.get_segments();
    p.out = reader.get_string("out", p.out);
    p.plot = reader.get_string("plot", p.plot);
    p.cusp_out = reader.get_string("cusp_out", p.cusp_out);
    const std::string sweep = reader.get_string("sweep_mu", "");
    p.g11 = reader.get_double("g11", 0);
    p.g22 = reader.get_double("g22", 0);

    if (!sweep.empty()) {
        try {
            p.sweep_mu = parse_mu_spec(sweep);
        } catch (const std::exception& ex) {
            reader.error(std::string("sectors sweep_mu: ") + ex.what());
        }
        if (!reader.has("g11") || !reader.has("g22"))
            reader.error("sectors: sweep_mu requires g11 and g22");
        if (!p.segments.empty())
            reader.error("sectors: give either segments or sweep_mu, not both");
        if (p.n == 0) p.n = 2;
        if (p.n != 2) reader.error("sectors: sweep mode is 2x2");
        if (p.k0.empty()) p.k0 = {0.1, 0.9};
    } else {
        if (p.segments.empty()) reader.error("sectors: at least one segment required");
        if (p.n == 0 && !p.k0.empty()) p.n = static_cast<int>(p.k0.size());
    }
    if (p.n < 1) reader.error("sectors: n must be >= 1");
    if (p.k0.empty()) reader.error("sectors: k0 required");
    if (!p.k0.empty() && static_cast<int>(p.k0.size()) != p.n)
        reader.error("sectors: k0 must have n components");
    for (double v : p.k0)
        if (!(v > 0)) {
            reader.error("sectors: k0 components must be > 0");
            break;
        }
    if (!(p.t_end > 0)) reader.error("sectors: t_end must be > 0");
    if (!(p.dt > 0)) reader.error("sectors: dt must be > 0");
    if (p.dt > 0 && p.t_end > 0 && p.t_end / p.dt < 2)
        reader.error("sectors: grid needs at least 3 points");
    double prev = -1;
    for (const auto& [start, matrix] : p.segments) {
        if (p.n >= 1 && matrix.n != p.n)
            reader.error("sectors: segment matrix dimension " + std::to_string(matrix.n) +
                         " does not match n = " + std::to_string(p.n));
        if (start <= prev)
            reader.error("sectors: segment start times must be strictly increasing");
        prev = start;
    }
    if (!p.segments.empty() && p.segments.front().first != 0.0)
        reader.error("sectors: first segment must start at t = 0");
    if (p.out.empty()) reader.error("sectors: out must be a filename");
    return p;
}

FitParams read_fit(const KeyReader& reader) {
    FitParams p;
    p.wealth = reader.get_string("wealth", p.wealth);
    p.series = reader.get_string("series", p.series);
    p.lags = reader.get_string("lags", p.lags);
    p.tolerance = reader.get_double("tolerance", p.tolerance);
    p.out = reader.get_string("out", p.out);
    if (p.wealth.empty() && p.series.empty())
        reader.error("fit: at least one of wealth or series is required");
    if (!(p.tolerance >= 0)) reader.error("fit: tolerance must be >= 0");
    if (p.out.empty()) reader.error("fit: out must be a filename");
    validate_lag_spec(reader, "fit lags", p.lags, 0);
    return p;
}

Scenario read_stage(const RawScenario& raw, std::vector<std::string>& errors, int stage,
                    std::uint64_t parent_seed);

ParseResult assemble(const RawScenario& raw, std::vector<std::string> errors) {
    Scenario scenario;
    KeyReader root(raw, errors, {""});
    const Entry* kind_entry = root.find("kind");
    bool kind_ok = false;
    if (!kind_entry) {
        errors.push_back(raw.origin + ": missing required key 'kind'");
    } else {
        scenario.kind = parse_kind(kind_entry->value, kind_ok);
        if (!kind_ok)
            root.fail(*kind_entry, "unknown kind '" + kind_entry->value +
                                       "' (walk|lattice|levy|sectors|fit|pipeline)");
    }
    scenario.seed = root.get_uint("seed", 1);
    scenario.name = root.get_string("name", "");

    if (kind_entry && kind_ok) {
        const std::string section = std::string(kind_name(scenario.kind));
        KeyReader reader(raw, errors, {"", section});
        switch (scenario.kind) {
        case ScenarioKind::walk: scenario.params = read_walk(reader); break;
        case ScenarioKind::lattice: scenario.params = read_lattice(reader); break;
        case ScenarioKind::levy: scenario.params = read_levy(reader); break;
        case ScenarioKind::sectors: scenario.params = read_sectors(reader); break;
        case ScenarioKind::fit: scenario.params = read_fit(reader); break;
        case ScenarioKind::pipeline: {
            PipelineParams pipeline;
            if (raw.stage_count == 0)
                errors.push_back(raw.origin + ": pipeline needs at least one [stage] section");
            for (int stage = 0; stage < raw.stage_count; ++stage)
                pipeline.stages.push_back(read_stage(raw, errors, stage, scenario.seed));
            scenario.params = std::move(pipeline);
            break;
        }
        }
        reader.report_unconsumed();
        // flag stray keys in sections that do not belong to this kind
        for (const auto& entry : raw.entries) {
            if (entry.consumed) continue;
            if (entry.section.empty() || entry.section == section) continue;
            if (scenario.kind == ScenarioKind::pipeline && entry.section == "stage") continue;
            errors.push_back(raw.origin + ":" + std::to_string(entry.line) + ": [" +
                             entry.section + "] " + entry.key +
                             ": section does not belong to kind '" + section + "'");
        }
    }

    ParseResult result;
    result.errors = std::move(errors);
    if (result.errors.empty()) result.scenario = std::move(scenario);
    return result;
}

Scenario read_stage(const RawScenario& raw, std::vector<std::string>& errors, int stage,
                    std::uint64_t parent_seed) {
    Scenario scenario;
    KeyReader reader(raw, errors, {}, stage);
    const Entry* kind_entry = reader.find("kind");
    bool kind_ok = false;
    if (!kind_entry) {
        errors.push_back(raw.origin + ": [stage " + std::to_string(stage + 1) +
                         "] missing required key 'kind'");
    } else {
        scenario.kind = parse_kind(kind_entry->value, kind_ok);
        if (!kind_ok) reader.fail(*kind_entry, "unknown stage kind '" + kind_entry->value + "'");
        if (kind_ok && scenario.kind == ScenarioKind::pipeline) {
            reader.fail(*kind_entry, "pipelines cannot nest");
            kind_ok = false;
        }
    }
    scenario.seed = reader.has("seed")
                        ? reader.get_uint("seed", parent_seed)
                        : parent_seed + static_cast<std::uint64_t>(stage);
    scenario.name = reader.get_string("name", "stage" + std::to_string(stage + 1));
    if (kind_entry && kind_ok) {
        switch (scenario.kind) {
        case ScenarioKind::walk: scenario.params = read_walk(reader); break;
        case ScenarioKind::lattice: scenario.params = read_lattice(reader); break;
        case ScenarioKind::levy: scenario.params = read_levy(reader); break;
        case ScenarioKind::sectors: scenario.params = read_sectors(reader); break;
        case ScenarioKind::fit: scenario.params = read_fit(reader); break;
        case ScenarioKind::pipeline: break;
        }
    }
    reader.report_unconsumed();
    return scenario;
}

// ---------------------------------------------------------- serialization

void append_kv(std::string& out, const std::string& key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
}

std::string matrix_text(const sectors::GrowthMatrix& g) {
    std::string out;
    for (int i = 0; i < g.n; ++i) {
        if (i) out += " | ";
        for (int j = 0; j < g.n; ++j) {
            if (j) out += ' ';
            out += io::format_double(g.at(i, j));
        }
    }
    return out;
}

std::string vector_text(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += io::format_double(v[i]);
    }
    return out;
}

void serialize_params(const Scenario& scenario, std::string& out, const std::string& prefix) {
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, WalkParams>) {
                append_kv(out, prefix + "dim", std::to_string(p.dim));
                append_kv(out, prefix + "steps", std::to_string(p.steps));
                append_kv(out, prefix + "walkers", std::to_string(p.walkers));
                append_kv(out, prefix + "lags", p.lags);
                append_kv(out, prefix + "out", p.out);
            } else if constexpr (std::is_same_v<T, LatticeParams>) {
                append_kv(out, prefix + "dims", std::to_string(p.dims));
                append_kv(out, prefix + "side", std::to_string(p.side));
                append_kv(out, prefix + "mean_a", io::format_double(p.mean_a));
                append_kv(out, prefix + "k0", std::to_string(p.k0));
                append_kv(out, prefix + "s", io::format_double(p.s));
                append_kv(out, prefix + "delta", io::format_double(p.delta));
                append_kv(out, prefix + "da", io::format_double(p.da));
                append_kv(out, prefix + "dk", io::format_double(p.dk));
                append_kv(out, prefix + "horizon", io::format_double(p.horizon));
                append_kv(out, prefix + "record", io::format_double(p.record));
                append_kv(out, prefix + "ensemble", std::to_string(p.ensemble));
                append_kv(out, prefix + "well_mixed", p.well_mixed ? "true" : "false");
                append_kv(out, prefix + "max_dt", io::format_double(p.max_dt));
                append_kv(out, prefix + "out", p.out);
            } else if constexpr (std::is_same_v<T, LevyParams>) {
                if (p.use_uniform)
                    append_kv(out, prefix + "uniform_bound", io::format_double(p.uniform_bound));
                else
                    append_kv(out, prefix + "alpha", io::format_double(p.alpha));
                append_kv(out, prefix + "scale", io::format_double(p.scale));
                append_kv(out, prefix + "steps", std::to_string(p.steps));
                append_kv(out, prefix + "paths", std::to_string(p.paths));
                append_kv(out, prefix + "lags", p.lags);
                append_kv(out, prefix + "out", p.out);
                if (!p.plot.empty()) append_kv(out, prefix + "plot", p.plot);
                if (!p.series_out.empty()) {
                    append_kv(out, prefix + "series_out", p.series_out);
                    append_kv(out, prefix + "series_steps", std::to_string(p.series_steps));
                    append_kv(out, prefix + "series_scale", io::format_double(p.series_scale));
                }
            } else if constexpr (std::is_same_v<T, SectorsParams>) {
                append_kv(out, prefix + "n", std::to_string(p.n));
                append_kv(out, prefix + "k0", vector_text(p.k0));
                append_kv(out, prefix + "t_end", io::format_double(p.t_end));
                append_kv(out, prefix + "dt", io::format_double(p.dt));
                for (std::size_t i = 0; i < p.segments.size(); ++i)
                    append_kv(out, prefix + "segment" + std::to_string(i + 1),
                              io::format_double(p.segments[i].first) + " : " +
                                  matrix_text(p.segments[i].second));
                if (!p.sweep_mu.empty()) {
                    append_kv(out, prefix + "sweep_mu", vector_text(p.sweep_mu));
                    append_kv(out, prefix + "g11", io::format_double(p.g11));
                    append_kv(out, prefix + "g22", io::format_double(p.g22));
                }
                append_kv(out, prefix + "out", p.out);
                if (!p.plot.empty()) append_kv(out, prefix + "plot", p.plot);
                if (!p.cusp_out.empty()) append_kv(out, prefix + "cusp_out", p.cusp_out);
            } else if constexpr (std::is_same_v<T, FitParams>) {
                if (!p.wealth.empty()) append_kv(out, prefix + "wealth", p.wealth);
                if (!p.series.empty()) append_kv(out, prefix + "series", p.series);
                append_kv(out, prefix + "lags", p.lags);
                append_kv(out, prefix + "tolerance", io::format_double(p.tolerance));
                append_kv(out, prefix + "out", p.out);
            } else if constexpr (std::is_same_v<T, PipelineParams>) {
                for (std::size_t i = 0; i < p.stages.size(); ++i) {
                    const auto& stage = p.stages[i];
                    const std::string stage_prefix =
                        prefix + "stage" + std::to_string(i + 1) + ".";
                    append_kv(out, stage_prefix + "kind", std::string(kind_name(stage.kind)));
                    append_kv(out, stage_prefix + "seed", std::to_string(stage.seed));
                    serialize_params(stage, out, stage_prefix);
                }
            }
        },
        scenario.params);
}

// ---------------------------------------------------------------- running

struct RunContext {
    fs::path out_dir;
    std::uint64_t seed = 0;
    std::string hash;
    int threads = 0;
    std::vector<std::string> outputs;

    std::string out_path(const std::string& name) const {
        return (out_dir / name).string();
    }
    std::string resolve_input(const std::string& name) const {
        const fs::path local = out_dir / name;
        if (fs::exists(local)) return local.string();
        return name;
    }
    void record_output(const std::string& name) { outputs.push_back(name); }
    std::string provenance() const {
        return std::string(kToolName) + " v" + std::string(kToolVersion) +
               " seed=" + std::to_string(seed) + " scenario=" + hash;
    }
};

void try_plot(RunContext& ctx, const std::string& name,
              const std::vector<svg::SeriesSpec>& series, svg::PlotOptions options) {
    // plotting failures never fail the data run
    try {
        options.provenance = ctx.provenance();
        svg::write_line_chart(ctx.out_path(name), series, options);
        ctx.record_output(name);
    } catch (const std::exception& ex) {
        std::cerr << "warning: plot '" << name << "' failed: " << ex.what() << "\n";
    }
}

void run_walk(const WalkParams& p, RunContext& ctx) {
    walk::WalkEnsembleSpec spec{p.dim, p.steps, p.walkers, ctx.seed};
    const auto lags = parse_lag_spec(p.lags);
    const auto stats = walk::simulate_return_statistics(spec, lags, ctx.threads);
    io::CsvWriter csv(ctx.out_path(p.out));
    csv.provenance(ctx.seed, ctx.hash);
    csv.header({"lag", "p_origin", "stderr"});
    for (std::size_t i = 0; i < stats.lags.size(); ++i)
        csv.row(stats.lags[i], stats.p_origin[i], stats.standard_errors[i]);
    ctx.record_output(p.out);
}

void run_lattice(const LatticeParams& p, RunContext& ctx) {
    lattice::ReactionRates rates{p.s, p.delta, p.da, p.dk};
    lattice::RunOptions options;
    options.well_mixed = p.well_mixed;
    options.threads = ctx.threads;
    if (p.max_dt > 0) options.max_dt = p.max_dt;

    std::vector<lattice::RunSummary> summaries;
    for (int rep = 0; rep < p.ensemble; ++rep) {
        auto state = lattice::init_lattice(p.dims, p.side, p.mean_a, p.k0,
                                           ctx.seed + static_cast<std::uint64_t>(rep));
        summaries.push_back(lattice::run(state, rates, p.horizon, p.record, options));
    }

    io::CsvWriter csv(ctx.out_path(p.out));
    csv.provenance(ctx.seed, ctx.hash);
    if (p.ensemble > 1)
        csv.comment("ensemble of " + std::to_string(p.ensemble) +
                    " replicas; k_total/growth_set_size/max_site_k are per-time medians");
    csv.header({"time", "k_total", "growth_set_size", "max_site_k", "overflowed"});
    const std::size_t records = summaries.front().times.size();
    for (std::size_t i = 0; i < records; ++i) {
        std::vector<double> ks, gs, ms;
        bool overflowed = false;
        for (const auto& summary : summaries) {
            ks.push_back(summary.k_total[i]);
            gs.push_back(static_cast<double>(summary.growth_set_size[i]));
            ms.push_back(static_cast<double>(summary.max_site_k[i]));
            overflowed = overflowed || summary.overflow[i] != 0;
        }
        const double t = p.record * static_cast<double>(i);
        csv.row(t, granular::stats::median(ks),
                static_cast<std::int64_t>(granular::stats::median(gs)),
                static_cast<std::uint64_t>(granular::stats::median(ms)),
                static_cast<std::int64_t>(overflowed ? 1 : 0));
    }
    ctx.record_output(p.out);
}

void run_levy(const LevyParams& p, RunContext& ctx) {
    const auto dist = p.use_uniform ? levy::StepDistribution::uniform(p.uniform_bound)
                                    : levy::StepDistribution::pareto(p.alpha, p.scale);
    const auto lags = parse_lag_spec(p.lags);
    const auto ensemble =
        levy::simulate_flight_at(dist, lags, static_cast<std::size_t>(p.paths), ctx.seed,
                                 ctx.threads);
    const auto peak = levy::central_peak_estimate(ensemble, lags);
    const auto width = levy::width_scaling(ensemble, lags);

    io::CsvWriter csv(ctx.out_path(p.out));
    csv.provenance(ctx.seed, ctx.hash);
    csv.comment("distribution: " + dist.label());
    csv.comment("peak slope=" + io::format_double(peak.slope) + " ci=" +
                io::format_double(peak.slope_ci) + " width exponent=" +
                io::format_double(width.exponent) + " ci=" +
                io::format_double(width.exponent_ci));
    csv.header({"lag", "p_origin", "sigma", "stderr"});
    for (std::size_t i = 0; i < peak.lags.size(); ++i)
        csv.row(peak.lags[i], peak.p_origin_hat[i], peak.sigma_hat[i], peak.stderr_hat[i]);
    ctx.record_output(p.out);

    if (!p.plot.empty()) {
        std::vector<double> lag_values, peak_values, sigma_values;
        for (std::size_t i = 0; i < peak.lags.size(); ++i) {
            lag_values.push_back(static_cast<double>(peak.lags[i]));
            peak_values.push_back(peak.p_origin_hat[i]);
            sigma_values.push_back(peak.sigma_hat[i]);
        }
        svg::PlotOptions options;
        options.log_x = true;
        options.log_y = true;
        options.title = "central peak and width scaling";
        options.x_label = "lag t";
        try_plot(ctx, p.plot,
                 {{"p_origin", lag_values, peak_values}, {"sigma", lag_values, sigma_values}},
                 options);
    }

    if (!p.series_out.empty()) {
        const std::int64_t n = p.series_steps > 0 ? p.series_steps : p.steps;
        RngStream rng(ctx.seed, 0, 0, stream_tag::kLevySeries);
        io::CsvWriter series_csv(ctx.out_path(p.series_out));
        series_csv.provenance(ctx.seed, ctx.hash);
        series_csv.comment("synthetic index levels exp(scale * walk) from " + dist.label());
        series_csv.header({"time", "value"});
        double x = 0;
        series_csv.row(std::int64_t{0}, 1.0);
        for (std::int64_t t = 1; t <= n; ++t) {
            x += levy::sample_step(dist, rng);
            series_csv.row(t, std::exp(p.series_scale * x));
        }
        ctx.record_output(p.series_out);
    }
}

std::vector<double> make_grid(double t_end, double dt) {
    const auto count = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
    std::vector<double> grid(count + 1);
    for (std::size_t i = 0; i <= count; ++i) grid[i] = dt * static_cast<double>(i);
    return grid;
}

void write_trajectory_csv(io::CsvWriter& csv, const sectors::SectorTrajectory& trajectory) {
    std::vector<std::string> columns{"time"};
    for (int i = 1; i <= trajectory.n; ++i) columns.push_back("k_" + std::to_string(i));
    columns.push_back("k_tot");
    for (int i = 1; i <= trajectory.n; ++i) columns.push_back("rate_" + std::to_string(i));
    csv.header(columns);
    for (std::size_t ti = 0; ti < trajectory.times.size(); ++ti) {
        std::string line = io::format_double(trajectory.times[ti]);
        const auto state = trajectory.state_at(ti);
        for (double v : state) line += "," + io::format_double(v);
        line += "," + io::format_double(trajectory.k_tot[ti]);
        for (double r : trajectory.rates_at(ti)) line += "," + io::format_double(r);
        csv.raw_row(line);
    }
}

void run_sectors(const SectorsParams& p, RunContext& ctx) {
    if (!p.sweep_mu.empty()) {
        io::CsvWriter summary(ctx.out_path(p.out));
        summary.provenance(ctx.seed, ctx.hash);
        summary.header({"mu", "lambda_max", "trough_time", "trough_k_tot"});
        std::vector<svg::SeriesSpec> plot_series;
        const auto grid = make_grid(p.t_end, p.dt);
        for (double mu : p.sweep_mu) {
            const auto g = sectors::build_policy_matrix(p.g11, p.g22, mu);
            sectors::ShockSchedule schedule{{{0.0, g}}, p.k0};
            const auto trajectory = sectors::integrate(schedule, grid);
            const auto eigen = sectors::eigen_solve(g);
            std::size_t trough = 0;
            for (std::size_t i = 1; i < trajectory.k_tot.size(); ++i)
                if (trajectory.k_tot[i] < trajectory.k_tot[trough]) trough = i;
            summary.row(mu, eigen.lambda_max, trajectory.times[trough],
                        trajectory.k_tot[trough]);

            const std::string name = [&] {
                std::string stem = p.out;
                const auto dot = stem.rfind('.');
                if (dot != std::string::npos) stem = stem.substr(0, dot);
                return stem + "_mu" + io::format_double(mu) + ".csv";
            }();
            io::CsvWriter csv(ctx.out_path(name));
            csv.provenance(ctx.seed, ctx.hash);
            csv.comment("mu=" + io::format_double(mu) +
                        " lambda_max=" + io::format_double(eigen.lambda_max));
            write_trajectory_csv(csv, trajectory);
            ctx.record_output(name);
            plot_series.push_back(
                {"mu=" + io::format_double(mu), grid, trajectory.k_tot});
        }
        ctx.record_output(p.out);
        if (!p.plot.empty()) {
            svg::PlotOptions options;
            options.log_y = true;
            options.title = "K_tot under transfer policy mu";
            options.x_label = "t";
            options.y_label = "K_tot";
            try_plot(ctx, p.plot, plot_series, options);
        }
        return;
    }

    sectors::ShockSchedule schedule;
    schedule.initial_state = p.k0;
    for (const auto& [start, matrix] : p.segments)
        schedule.segments.push_back({start, matrix});
    const auto grid = make_grid(p.t_end, p.dt);
    const auto trajectory = sectors::integrate(schedule, grid);

    io::CsvWriter csv(ctx.out_path(p.out));
    csv.provenance(ctx.seed, ctx.hash);
    write_trajectory_csv(csv, trajectory);
    ctx.record_output(p.out);

    if (!p.cusp_out.empty()) {
        const auto extrema = sectors::detect_cusps(trajectory.k_tot, trajectory.times);
        io::CsvWriter cusp_csv(ctx.out_path(p.cusp_out));
        cusp_csv.provenance(ctx.seed, ctx.hash);
        cusp_csv.header({"time", "kind"});
        for (const auto& e : extrema)
            cusp_csv.row(e.time, std::string(sectors::extremum_kind_name(e.kind)));
        ctx.record_output(p.cusp_out);
    }
    if (!p.plot.empty()) {
        std::vector<svg::SeriesSpec> series;
        for (int i = 0; i < trajectory.n; ++i) {
            svg::SeriesSpec s;
            s.label = "k_" + std::to_string(i + 1);
            s.x = trajectory.times;
            for (std::size_t ti = 0; ti < trajectory.times.size(); ++ti)
                s.y.push_back(trajectory.state_at(ti)[static_cast<std::size_t>(i)]);
            series.push_back(std::move(s));
        }
        series.push_back({"k_tot", trajectory.times, trajectory.k_tot});
        svg::PlotOptions options;
        options.log_y = true;
        options.title = "sector trajectories";
        options.x_label = "t";
        try_plot(ctx, p.plot, series, options);
    }
}

void run_fit(const FitParams& p, RunContext& ctx) {
    std::optional<fitkit::RankFit> rank;
    std::optional<fitkit::BetaEstimate> beta;
    if (!p.wealth.empty())
        rank = fitkit::rank_size_fit(io::load_wealth_list(ctx.resolve_input(p.wealth)));
    if (!p.series.empty()) {
        const auto series = io::load_series(ctx.resolve_input(p.series));
        for (double v : series.values)
            if (!(v > 0))
                throw ValidationError(p.series + ": series levels must be > 0 for the "
                                      "fluctuation-exponent estimate");
        beta = fitkit::beta_from_series(series.values, parse_lag_spec(p.lags));
    }

    io::CsvWriter csv(ctx.out_path(p.out));
    csv.provenance(ctx.seed, ctx.hash);
    csv.header({"quantity", "value"});
    std::ostringstream text;
    if (rank) {
        csv.row("alpha_hat", rank->alpha_hat);
        csv.row("alpha_ci", rank->ci_halfwidth);
        text << "rank-size alpha = " << io::format_double(rank->alpha_hat) << " +/- "
             << io::format_double(rank->ci_halfwidth) << " (ranks " << rank->min_rank << ".."
             << rank->max_rank << ")\n";
    }
    if (beta) {
        csv.row("beta_hat", beta->beta_hat);
        csv.row("beta_ci", beta->ci_halfwidth);
        text << "central-peak beta = " << io::format_double(beta->beta_hat) << " +/- "
             << io::format_double(beta->ci_halfwidth) << " (peak slope "
             << io::format_double(beta->peak.slope) << ")\n";
    }
    if (rank && beta) {
        const auto report = fitkit::alpha_beta_test(*rank, *beta, p.tolerance);
        csv.row("abs_difference", std::abs(report.alpha_hat - report.beta_hat));
        csv.row("tolerance", report.tolerance);
        csv.row("consistent", static_cast<std::int64_t>(report.consistent ? 1 : 0));
        text << "|alpha - beta| = "
             << io::format_double(std::abs(report.alpha_hat - report.beta_hat))
             << " tolerance = " << io::format_double(report.tolerance) << " -> "
             << (report.consistent ? "consistent" : "inconsistent") << "\n";
    }
    ctx.record_output(p.out);
    std::cout << text.str();
}

void dispatch(const Scenario& scenario, RunContext& ctx);

void run_pipeline(const PipelineParams& p, RunContext& ctx) {
    for (const auto& stage : p.stages) {
        RunContext stage_ctx = ctx;
        stage_ctx.seed = stage.seed;
        stage_ctx.outputs.clear();
        dispatch(stage, stage_ctx);
        for (const auto& name : stage_ctx.outputs) ctx.record_output(name);
    }
}

void dispatch(const Scenario& scenario, RunContext& ctx) {
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, WalkParams>) run_walk(p, ctx);
            else if constexpr (std::is_same_v<T, LatticeParams>) run_lattice(p, ctx);
            else if constexpr (std::is_same_v<T, LevyParams>) run_levy(p, ctx);
            else if constexpr (std::is_same_v<T, SectorsParams>) run_sectors(p, ctx);
            else if constexpr (std::is_same_v<T, FitParams>) run_fit(p, ctx);
            else if constexpr (std::is_same_v<T, PipelineParams>) run_pipeline(p, ctx);
        },
        scenario.params);
}

std::vector<std::string> declared_outputs(const Scenario& scenario) {
    std::vector<std::string> outputs;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, WalkParams>) {
                outputs.push_back(p.out);
            } else if constexpr (std::is_same_v<T, LatticeParams>) {
                outputs.push_back(p.out);
            } else if constexpr (std::is_same_v<T, LevyParams>) {
                outputs.push_back(p.out);
                if (!p.series_out.empty()) outputs.push_back(p.series_out);
            } else if constexpr (std::is_same_v<T, SectorsParams>) {
                outputs.push_back(p.out);
                if (!p.cusp_out.empty()) outputs.push_back(p.cusp_out);
            } else if constexpr (std::is_same_v<T, FitParams>) {
                outputs.push_back(p.out);
            } else if constexpr (std::is_same_v<T, PipelineParams>) {
                for (const auto& stage : p.stages)
                    for (auto& name : declared_outputs(stage)) outputs.push_back(name);
            }
        },
        scenario.params);
    return outputs;
}

} // namespace

std::string_view kind_name(ScenarioKind kind) {
    switch (kind) {
    case ScenarioKind::walk: return "walk";
    case ScenarioKind::lattice: return "lattice";
    case ScenarioKind::levy: return "levy";
    case ScenarioKind::sectors: return "sectors";
    case ScenarioKind::fit: return "fit";
    case ScenarioKind::pipeline: return "pipeline";
    }
    return "unknown";
}

std::string Scenario::canonical_text() const {
    std::string out;
    append_kv(out, "kind", std::string(kind_name(kind)));
    append_kv(out, "seed", std::to_string(seed));
    if (!name.empty()) append_kv(out, "name", name);
    serialize_params(*this, out, "");
    return out;
}

std::string Scenario::hash() const { return fnv1a64_hex(canonical_text()); }

ParseResult parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ParseResult result;
        result.errors.push_back("cannot open scenario file " + path);
        return result;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path);
}

ParseResult parse_scenario_text(const std::string& text, const std::string& origin) {
    std::vector<std::string> errors;
    const RawScenario raw = tokenize(text, origin, errors);
    return assemble(raw, std::move(errors));
}

std::string Manifest::to_json() const {
    nlohmann::ordered_json j;
    j["tool"] = std::string(kToolName);
    j["version"] = tool_version;
    j["scenario_hash"] = scenario_hash;
    j["seed"] = seed;
    j["wall_seconds"] = wall_seconds;
    nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
    for (const auto& [file, checksum] : output_checksums) outputs[file] = checksum;
    j["outputs"] = outputs;
    return j.dump(2);
}

Manifest run_scenario(const Scenario& scenario, const std::string& out_dir, int threads) {
    const auto start = std::chrono::steady_clock::now();

    RunContext ctx;
    ctx.out_dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    ctx.seed = scenario.seed;
    ctx.hash = scenario.hash();
    ctx.threads = threads;

    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + ctx.out_dir.string());
    // every declared output must be writable before any computation runs
    for (const auto& name : declared_outputs(scenario)) {
        std::ofstream probe(ctx.out_path(name), std::ios::app);
        if (!probe)
            throw ValidationError("output path not writable: " + ctx.out_path(name));
    }

    dispatch(scenario, ctx);

    Manifest manifest;
    manifest.tool_version = std::string(kToolVersion);
    manifest.scenario_hash = ctx.hash;
    manifest.seed = scenario.seed;
    for (const auto& name : ctx.outputs)
        manifest.output_checksums.emplace_back(name, file_checksum(ctx.out_path(name)));
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::ofstream mf(ctx.out_path("manifest.json"));
    if (!mf) throw ValidationError("cannot write manifest.json");
    mf << manifest.to_json() << "\n";
    return manifest;
}

std::vector<std::int64_t> parse_lag_spec(const std::string& spec) {
    const std::string t = trim(spec);
    if (t.empty()) throw ValidationError("lag spec: empty");
    if (t.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::istringstream in(t);
        std::string part;
        while (std::getline(in, part, ':')) parts.push_back(trim(part));
        if (parts.size() < 3 || lower(parts[2]) != "geometric")
            throw ValidationError("lag spec: expected 'a:b:geometric[:factor]'");
        double factor = 2.0;
        if (parts.size() == 4) factor = std::stod(parts[3]);
        else if (parts.size() > 4) throw ValidationError("lag spec: too many fields");
        return walk::geometric_lags(std::stoll(parts[0]), std::stoll(parts[1]), factor);
    }
    std::vector<std::int64_t> lags;
    std::istringstream in(t);
    std::string token;
    while (std::getline(in, token, ',')) {
        const std::string v = trim(token);
        if (v.empty()) continue;
        try {
            lags.push_back(std::stoll(v));
        } catch (const std::exception&) {
            throw ValidationError("lag spec: bad entry '" + v + "'");
        }
    }
    if (lags.empty()) throw ValidationError("lag spec: no lags");
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    return lags;
}

std::vector<double> parse_mu_spec(const std::string& spec) {
    const std::string t = trim(spec);
    if (t.empty()) throw ValidationError("mu spec: empty");
    if (t.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::istringstream in(t);
        std::string part;
        while (std::getline(in, part, ':')) parts.push_back(trim(part));
        if (parts.size() != 3) throw ValidationError("mu spec: expected 'a:b:n'");
        const double a = std::stod(parts[0]);
        const double b = std::stod(parts[1]);
        const int n = std::stoi(parts[2]);
        if (n < 1 || b < a) throw ValidationError("mu spec: need a <= b and n >= 1");
        std::vector<double> mus;
        for (int i = 0; i < n; ++i)
            mus.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1));
        return mus;
    }
    std::vector<double> mus;
    std::istringstream in(t);
    std::string token;
    while (std::getline(in, token, ',')) {
        const std::string v = trim(token);
        if (v.empty()) continue;
        try {
            mus.push_back(std::stod(v));
        } catch (const std::exception&) {
            throw ValidationError("mu spec: bad entry '" + v + "'");
        }
    }
    if (mus.empty()) throw ValidationError("mu spec: no values");
    return mus;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot checksum missing output " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return fnv1a64_hex(buffer.str());
}

} // namespace granular::cli
