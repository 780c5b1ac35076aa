#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "granular/sectors.hpp"

namespace granular::cli {

enum class ScenarioKind { walk, lattice, levy, sectors, fit, pipeline };

std::string_view kind_name(ScenarioKind kind);

struct WalkParams {
    int dim = 1;
    std::int64_t steps = 512;
    std::int64_t walkers = 10000;
    std::string lags = "8:512:geometric";
    std::string out = "walk.csv";
};

struct LatticeParams {
    int dims = 2;
    int side = 64;
    double mean_a = 1.0;
    std::uint64_t k0 = 1;
    double s = 0.1;
    double delta = 0.1;
    double da = 0.0;
    double dk = 0.0;
    double horizon = 20.0;
    double record = 1.0;
    int ensemble = 1;
    bool well_mixed = false;
    double max_dt = 0.0; // 0 = no extra cap
    std::string out = "lattice.csv";
};

struct LevyParams {
    bool use_uniform = false;
    double alpha = 1.5;
    double uniform_bound = 1.0;
    double scale = 1.0;
    std::int64_t steps = 2048;
    std::int64_t paths = 20000;
    std::string lags = "8:512:geometric";
    std::string out = "levy.csv";
    std::string plot;
    std::string series_out;         // optional single-path level series
    std::int64_t series_steps = 0;  // 0 = same as steps
    double series_scale = 1e-3;     // log-level scale of the emitted series
};

struct SectorsParams {
    int n = 0;
    std::vector<double> k0;
    double t_end = 0;
    double dt = 0;
    std::vector<std::pair<double, sectors::GrowthMatrix>> segments;
    std::string out = "sectors.csv";
    std::string plot;
    std::string cusp_out;
    // policy sweep mode
    std::vector<double> sweep_mu;
    double g11 = 0;
    double g22 = 0;
};

struct FitParams {
    std::string wealth;
    std::string series;
    std::string lags = "8:256:geometric";
    double tolerance = 0.1;
    std::string out = "fit_report.csv";
};

struct Scenario;

struct PipelineParams {
    std::vector<Scenario> stages;
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::walk;
    std::uint64_t seed = 1;
    std::string name;
    std::variant<WalkParams, LatticeParams, LevyParams, SectorsParams, FitParams,
                 PipelineParams>
        params;

    // Canonical key=value serialization; its hash identifies the scenario in
    // every output header and in the manifest.
    std::string canonical_text() const;
    std::string hash() const;
};

struct ParseResult {
    std::optional<Scenario> scenario;
    std::vector<std::string> errors; // exhaustive, not first-error-only

    bool ok() const { return errors.empty() && scenario.has_value(); }
};

ParseResult parse_scenario(const std::string& path);
ParseResult parse_scenario_text(const std::string& text, const std::string& origin);

struct Manifest {
    std::string tool_version;
    std::string scenario_hash;
    std::uint64_t seed = 0;
    double wall_seconds = 0;
    std::vector<std::pair<std::string, std::string>> output_checksums; // (file, fnv1a64)

    std::string to_json() const;
};

// Execute a validated scenario: writes all outputs under out_dir, then
// out_dir/manifest.json. Returns the manifest.
Manifest run_scenario(const Scenario& scenario, const std::string& out_dir,
                      int threads = 0);

// "8,16,32" or "a:b:geometric[:factor]".
std::vector<std::int64_t> parse_lag_spec(const std::string& spec);

// Comma list or "a:b:n" linear ladder, for --sweep-mu.
std::vector<double> parse_mu_spec(const std::string& spec);

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);
std::string file_checksum(const std::string& path);

} // namespace granular::cli
