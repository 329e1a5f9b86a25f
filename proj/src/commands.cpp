#include "pimcaps/commands.hpp"

#include <cmath>
#include <sstream>

namespace pimcaps::cli {

hmc::HMCConfig hmc_at_frequency(double freq_hz) {
    hmc::HMCConfig mem;
    mem.vault_freq = freq_hz;
    return mem;
}

plan::CostParams cost_params_at(const hmc::HMCConfig& mem) {
    return plan::CostParams::defaults_for(static_cast<double>(mem.pes_per_vault),
                                          mem.vault_freq, mem.internal_bw,
                                          mem.n_vaults);
}

std::string cmd_plan(const BenchmarkConfig& cfg, double freq_hz) {
    const hmc::HMCConfig mem = hmc_at_frequency(freq_hz);
    const auto report = plan::select_dimension(cfg.net, cost_params_at(mem));
    return plan::cost_report_csv(report);
}

std::string cmd_simulate(const BenchmarkConfig& cfg, sim::Scenario scenario,
                         const ToolOptions& opt, std::string* trace_csv) {
    const hmc::HMCConfig mem = hmc_at_frequency(plan::kDefaultVaultFreq);
    const auto report = plan::select_dimension(cfg.net, cost_params_at(mem));
    sim::RunOptions ro;
    ro.seed = opt.seed;
    ro.with_numerics = opt.with_numerics;
    ro.with_trace = opt.trace && trace_csv != nullptr;
    const auto run = sim::run_rp(cfg.net, report.selected, scenario, mem, ro);
    if (trace_csv) *trace_csv = run.trace_csv;
    return sim::metrics_to_json(run.metrics) + "\n";
}

std::string cmd_calibrate(std::size_t n_samples, float lo, float hi,
                          std::uint64_t seed) {
    const auto params = arith::calibrate_exp_recovery(n_samples, lo, hi, seed);
    return arith::exp_params_to_json(params) + "\n";
}

namespace {

double rp_seconds(const sim::SimMetrics& m, const hmc::HMCConfig& mem) {
    return m.seconds(mem.vault_freq);
}

// Whole-network latency: the reference design runs host layers and routing
// serially on one device; in-memory designs overlap them as a two-stage
// pipeline. All-in-PIM pays the PE/host throughput gap on the host layers.
double network_seconds(const BenchmarkConfig& cfg, sim::Scenario s,
                       const sim::SimMetrics& m, const hmc::HMCConfig& mem,
                       std::size_t n_batches) {
    const double host = cfg.host_latency_s();
    const double rp = rp_seconds(m, mem);
    if (s == sim::Scenario::BaselineModel)
        return static_cast<double>(n_batches) * (host + rp);
    if (s == sim::Scenario::AllInPIM) {
        const double pim_tput = static_cast<double>(mem.n_vaults * mem.pes_per_vault) *
                                mem.vault_freq;
        const double host_pim = host * (3584.0 * 1.19e9 * 0.35) / pim_tput;
        return sim::pipeline_model(host_pim, rp, n_batches);
    }
    const double host_adj =
        host + static_cast<double>(m.host_stall_cycles) / mem.vault_freq;
    return sim::pipeline_model(host_adj, rp, n_batches);
}

} // namespace

std::vector<CompareRow> run_compare(const std::vector<BenchmarkConfig>& cfgs,
                                    const std::vector<sim::Scenario>& scenarios,
                                    const ToolOptions& opt) {
    const hmc::HMCConfig mem = hmc_at_frequency(plan::kDefaultVaultFreq);
    const std::size_t n_batches = 16;
    std::vector<CompareRow> rows;
    for (const auto& cfg : cfgs) {
        const auto report = plan::select_dimension(cfg.net, cost_params_at(mem));
        sim::RunOptions ro;
        ro.seed = opt.seed;

        const auto base =
            sim::run_rp(cfg.net, report.selected, sim::Scenario::BaselineModel, mem, ro);
        const double base_t = network_seconds(cfg, sim::Scenario::BaselineModel,
                                              base.metrics, mem, n_batches);
        const double base_e = base.metrics.energy_rel;

        for (const auto s : scenarios) {
            const auto run = sim::run_rp(cfg.net, report.selected, s, mem, ro);
            CompareRow row;
            row.config = cfg.name;
            row.scenario = sim::scenario_name(s);
            row.rp_cycles = static_cast<double>(run.metrics.total_cycles);
            row.speedup = base_t / network_seconds(cfg, s, run.metrics, mem, n_batches);
            row.energy_norm = run.metrics.energy_rel / base_e;
            rows.push_back(row);
        }
    }
    return rows;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "config,scenario,rp_cycles,speedup,energy_norm\n";
    for (const auto& r : rows)
        os << r.config << ',' << r.scenario << ',' << r.rp_cycles << ',' << r.speedup
           << ',' << r.energy_norm << '\n';
    return os.str();
}

std::vector<SweepCell> run_sweep(const BenchmarkConfig& cfg, const ToolOptions& opt) {
    std::vector<SweepCell> cells;
    for (double f : opt.freqs_hz) {
        const hmc::HMCConfig mem = hmc_at_frequency(f);
        const auto report = plan::select_dimension(cfg.net, cost_params_at(mem));
        sim::RunOptions ro;
        ro.seed = opt.seed;

        const auto base =
            sim::run_rp(cfg.net, report.selected, sim::Scenario::BaselineModel, mem, ro);
        const double base_s = base.metrics.seconds(mem.vault_freq);

        std::size_t best = 0;
        std::vector<SweepCell> row;
        for (const plan::Dim d : {plan::Dim::B, plan::Dim::L, plan::Dim::H}) {
            const auto run = sim::run_rp(cfg.net, d, sim::Scenario::PIMCapsNet, mem, ro);
            SweepCell c;
            c.config = cfg.name;
            c.freq_hz = f;
            c.dim = d;
            c.total_cycles = static_cast<double>(run.metrics.total_cycles);
            c.speedup = base_s / run.metrics.seconds(mem.vault_freq);
            c.planner_choice = (d == report.selected);
            row.push_back(c);
            if (c.total_cycles < row[best].total_cycles) best = row.size() - 1;
        }
        row[best].sim_best = true;
        cells.insert(cells.end(), row.begin(), row.end());
    }
    return cells;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
    std::ostringstream os;
    os.precision(17);
    os << "config,freq_hz,dim,total_cycles,speedup,planner_choice,sim_best\n";
    for (const auto& c : cells)
        os << c.config << ',' << c.freq_hz << ',' << plan::dim_name(c.dim) << ','
           << c.total_cycles << ',' << c.speedup << ',' << (c.planner_choice ? 1 : 0)
           << ',' << (c.sim_best ? 1 : 0) << '\n';
    return os.str();
}

} // namespace pimcaps::cli
