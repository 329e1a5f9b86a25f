#ifndef PIMCAPS_COMMANDS_HPP
#define PIMCAPS_COMMANDS_HPP

#include <string>
#include <vector>

#include "pimcaps/config_io.hpp"
#include "pimcaps/planner.hpp"
#include "pimcaps/sim.hpp"

namespace pimcaps::cli {

/// Shared run context resolved from flags and the environment.
struct ToolOptions {
    std::uint64_t seed = 1;
    std::vector<double> freqs_hz = plan::kDefaultSweepFreqs;
    std::string out_dir; // PIMCAPS_OUT_DIR or cwd
    bool trace = false;
    bool with_numerics = false;
};

hmc::HMCConfig hmc_at_frequency(double freq_hz);
plan::CostParams cost_params_at(const hmc::HMCConfig& mem);

/// plan: per-dimension E/M/S rows plus the selected dimension.
std::string cmd_plan(const BenchmarkConfig& cfg, double freq_hz);

/// simulate: one scenario run emitted as a JSON metrics object. When the
/// trace flag is set and trace_csv is non-null, the queue trace lands there.
std::string cmd_simulate(const BenchmarkConfig& cfg, sim::Scenario scenario,
                         const ToolOptions& opt, std::string* trace_csv = nullptr);

/// calibrate: exponential recovery constants as a JSON record.
std::string cmd_calibrate(std::size_t n_samples, float lo, float hi, std::uint64_t seed);

/// compare: config x scenario table, normalized against the host baseline.
struct CompareRow {
    std::string config;
    std::string scenario;
    double rp_cycles = 0.0;
    double speedup = 0.0;     // whole-network, pipeline model
    double energy_norm = 0.0; // energy_rel / baseline energy_rel
};
std::vector<CompareRow> run_compare(const std::vector<BenchmarkConfig>& cfgs,
                                    const std::vector<sim::Scenario>& scenarios,
                                    const ToolOptions& opt);
std::string compare_csv(const std::vector<CompareRow>& rows);

/// sweep: frequency x dimension heat-map cells with the planner's choice.
struct SweepCell {
    std::string config;
    double freq_hz = 0.0;
    plan::Dim dim = plan::Dim::B;
    double total_cycles = 0.0;
    double speedup = 0.0; // vs the host baseline at that frequency
    bool planner_choice = false;
    bool sim_best = false;
};
std::vector<SweepCell> run_sweep(const BenchmarkConfig& cfg, const ToolOptions& opt);
std::string sweep_csv(const std::vector<SweepCell>& cells);

} // namespace pimcaps::cli

#endif
