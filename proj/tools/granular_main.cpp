#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "granular/errors.hpp"
#include "granular/parallel.hpp"
#include "granular/scenario.hpp"
#include "granular/version.hpp"

namespace cli = granular::cli;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct GlobalFlags {
    std::uint64_t seed = 1;
    bool seed_set = false;
    int threads = 0;
    std::string out_dir = ".";
};

int execute(const cli::Scenario& scenario, const GlobalFlags& flags) {
    const auto manifest = cli::run_scenario(scenario, flags.out_dir, flags.threads);
    std::cout << "scenario " << manifest.scenario_hash << " done in "
              << manifest.wall_seconds << " s; " << manifest.output_checksums.size()
              << " output(s) in " << flags.out_dir << "\n";
    return 0;
}

int run_file(const std::string& path, const GlobalFlags& flags) {
    auto parsed = cli::parse_scenario(path);
    if (!parsed.ok()) {
        for (const auto& error : parsed.errors) std::cerr << "error: " << error << "\n";
        return kExitValidation;
    }
    if (flags.seed_set) parsed.scenario->seed = flags.seed;
    return execute(*parsed.scenario, flags);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(granular::kToolName) +
                 " - autocatalytic growth, Levy fluctuation and multi-sector "
                 "creative-destruction toolkit"};
    app.set_version_flag("--version", std::string(granular::kToolVersion));
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand name

    GlobalFlags flags;
    app.add_option("--seed", flags.seed, "RNG seed (recorded in every output)")
        ->each([&](const std::string&) { flags.seed_set = true; });
    app.add_option("--threads", flags.threads, "worker threads (0 = auto)");
    app.add_option("--out-dir", flags.out_dir, "output directory");

    // walk ------------------------------------------------------------
    cli::WalkParams walk;
    auto* walk_cmd = app.add_subcommand("walk", "random-walk return statistics");
    walk_cmd->add_option("--dim", walk.dim, "lattice dimension (1|2|3)");
    walk_cmd->add_option("--steps", walk.steps, "time steps per walker");
    walk_cmd->add_option("--walkers", walk.walkers, "ensemble size");
    walk_cmd->add_option("--lags", walk.lags, "comma list or a:b:geometric[:f]");
    walk_cmd->add_option("--out", walk.out, "output CSV (lag,p_origin,stderr)");

    // lattice ----------------------------------------------------------
    cli::LatticeParams lattice;
    auto* lattice_cmd = app.add_subcommand("lattice", "autocatalytic agent lattice");
    lattice_cmd->add_option("--dims", lattice.dims, "lattice dimension (1|2|3)");
    lattice_cmd->add_option("--side", lattice.side, "lattice side length");
    lattice_cmd->add_option("--mean-a", lattice.mean_a, "mean resource count per site");
    lattice_cmd->add_option("--k0", lattice.k0, "initial k per site");
    lattice_cmd->add_option("--s", lattice.s, "proliferation rate");
    lattice_cmd->add_option("--delta", lattice.delta, "death rate");
    lattice_cmd->add_option("--da", lattice.da, "a diffusion rate");
    lattice_cmd->add_option("--dk", lattice.dk, "k diffusion rate");
    lattice_cmd->add_option("--horizon", lattice.horizon, "simulated time span");
    lattice_cmd->add_option("--record", lattice.record, "recording interval");
    lattice_cmd->add_option("--ensemble", lattice.ensemble, "replica count (medians reported)");
    lattice_cmd->add_flag("--well-mixed", lattice.well_mixed,
                          "replace local a by the global mean (scalar control)");
    lattice_cmd->add_option("--max-dt", lattice.max_dt, "extra cap on the tau-leap step");
    lattice_cmd->add_option("--out", lattice.out, "output CSV");

    // levy --------------------------------------------------------------
    cli::LevyParams levy;
    bool levy_alpha_set = false, levy_uniform_set = false;
    auto* levy_cmd = app.add_subcommand("levy", "heavy-tailed flight scaling");
    levy_cmd->add_option("--alpha", levy.alpha, "Pareto tail exponent")
        ->each([&](const std::string&) { levy_alpha_set = true; });
    levy_cmd->add_option("--uniform-bound", levy.uniform_bound, "uniform step half-width")
        ->each([&](const std::string&) { levy_uniform_set = true; });
    levy_cmd->add_option("--scale", levy.scale, "Pareto minimum step magnitude");
    levy_cmd->add_option("--steps", levy.steps, "steps per path");
    levy_cmd->add_option("--paths", levy.paths, "ensemble size");
    levy_cmd->add_option("--lags", levy.lags, "comma list or a:b:geometric[:f]");
    levy_cmd->add_option("--out", levy.out, "output CSV (lag,p_origin,sigma,stderr)");
    levy_cmd->add_option("--plot", levy.plot, "optional SVG log-log plot");
    levy_cmd->add_option("--series-out", levy.series_out,
                         "optional synthetic level series CSV (time,value)");
    levy_cmd->add_option("--series-steps", levy.series_steps, "series length");

    // sectors -----------------------------------------------------------
    std::string sectors_file;
    std::string sweep_mu;
    double sweep_g11 = 0.02, sweep_g22 = -0.05;
    std::string sweep_k0 = "0.1 0.9";
    double sweep_t_end = 120.0, sweep_dt = 0.05;
    std::string sectors_out = "sectors.csv", sectors_plot;
    auto* sectors_cmd = app.add_subcommand("sectors", "multi-sector growth model");
    sectors_cmd->add_option("scenario", sectors_file, "scenario file (kind=sectors implied)");
    sectors_cmd->add_option("--sweep-mu", sweep_mu, "policy sweep, comma list or a:b:n");
    sectors_cmd->add_option("--g11", sweep_g11, "sector 1 intrinsic rate (sweep mode)");
    sectors_cmd->add_option("--g22", sweep_g22, "sector 2 intrinsic rate (sweep mode)");
    sectors_cmd->add_option("--k0", sweep_k0, "initial state (sweep mode)");
    sectors_cmd->add_option("--t-end", sweep_t_end, "horizon (sweep mode)");
    sectors_cmd->add_option("--dt", sweep_dt, "grid step (sweep mode)");
    sectors_cmd->add_option("--out", sectors_out, "output CSV (sweep mode)");
    sectors_cmd->add_option("--plot", sectors_plot, "optional SVG (sweep mode)");

    // fit -----------------------------------------------------------------
    cli::FitParams fit;
    auto* fit_cmd = app.add_subcommand("fit", "rank-size alpha / fluctuation beta estimators");
    fit_cmd->add_option("--wealth", fit.wealth, "CSV of sizes ('size' or 'rank,size')");
    fit_cmd->add_option("--series", fit.series, "CSV level series ('time,value')");
    fit_cmd->add_option("--lags", fit.lags, "increment windows for the beta estimate");
    fit_cmd->add_option("--tolerance", fit.tolerance, "alpha = beta verdict tolerance");
    fit_cmd->add_option("--out", fit.out, "report CSV");

    // run -------------------------------------------------------------------
    std::string run_file_path;
    auto* run_cmd = app.add_subcommand("run", "run a scenario file");
    run_cmd->add_option("file", run_file_path, "scenario file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (flags.threads > 0) granular::set_default_thread_count(flags.threads);
        cli::Scenario scenario;
        scenario.seed = flags.seed;
        if (walk_cmd->parsed()) {
            scenario.kind = cli::ScenarioKind::walk;
            scenario.params = walk;
        } else if (lattice_cmd->parsed()) {
            scenario.kind = cli::ScenarioKind::lattice;
            scenario.params = lattice;
        } else if (levy_cmd->parsed()) {
            if (levy_alpha_set && levy_uniform_set)
                throw granular::ValidationError("levy: give --alpha or --uniform-bound, not both");
            levy.use_uniform = levy_uniform_set;
            scenario.kind = cli::ScenarioKind::levy;
            scenario.params = levy;
        } else if (sectors_cmd->parsed()) {
            if (!sectors_file.empty()) {
                // scenario file with kind=sectors implied when absent
                auto parsed = cli::parse_scenario(sectors_file);
                if (!parsed.ok() && !parsed.errors.empty() &&
                    parsed.errors.front().find("missing required key 'kind'") != std::string::npos) {
                    std::ifstream in(sectors_file);
                    std::stringstream buffer;
                    buffer << "kind = sectors\n" << in.rdbuf();
                    parsed = cli::parse_scenario_text(buffer.str(), sectors_file);
                }
                if (!parsed.ok()) {
                    for (const auto& error : parsed.errors)
                        std::cerr << "error: " << error << "\n";
                    return kExitValidation;
                }
                if (flags.seed_set) parsed.scenario->seed = flags.seed;
                return execute(*parsed.scenario, flags);
            }
            if (sweep_mu.empty())
                throw granular::ValidationError(
                    "sectors: give a scenario file or --sweep-mu");
            cli::SectorsParams params;
            params.n = 2;
            params.sweep_mu = cli::parse_mu_spec(sweep_mu);
            params.g11 = sweep_g11;
            params.g22 = sweep_g22;
            params.t_end = sweep_t_end;
            params.dt = sweep_dt;
            params.out = sectors_out;
            params.plot = sectors_plot;
            {
                std::istringstream in(sweep_k0);
                double v;
                while (in >> v) params.k0.push_back(v);
            }
            if (params.k0.size() != 2)
                throw granular::ValidationError("sectors sweep: k0 needs 2 components");
            scenario.kind = cli::ScenarioKind::sectors;
            scenario.params = params;
        } else if (fit_cmd->parsed()) {
            if (fit.wealth.empty() && fit.series.empty())
                throw granular::ValidationError("fit: give --wealth and/or --series");
            scenario.kind = cli::ScenarioKind::fit;
            scenario.params = fit;
        } else if (run_cmd->parsed()) {
            return run_file(run_file_path, flags);
        }
        return execute(scenario, flags);
    } catch (const granular::ValidationError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const granular::NumericError& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& ex) {
        std::cerr << "unexpected failure: " << ex.what() << "\n";
        return 1;
    }
}
