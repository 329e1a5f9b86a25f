// pimcaps: plan, simulate, calibrate, compare and sweep capsule-routing
// workloads on the in-memory accelerator model.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "pimcaps/commands.hpp"

using namespace pimcaps;

namespace {

cli::ToolOptions tool_options(std::uint64_t seed, const std::string& out,
                              bool trace, bool numerics) {
    cli::ToolOptions opt;
    opt.seed = seed;
    opt.trace = trace;
    opt.with_numerics = numerics;
    if (!out.empty()) {
        opt.out_dir = out;
    } else if (const char* env = std::getenv("PIMCAPS_OUT_DIR")) {
        opt.out_dir = env;
    }
    return opt;
}

void emit(const std::string& text, const std::string& out_path,
          const cli::ToolOptions& opt) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::filesystem::path p(out_path);
    if (p.is_relative() && !opt.out_dir.empty())
        p = std::filesystem::path(opt.out_dir) / p;
    cli::write_file_atomic(p.string(), text);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"capsule-network routing planner and in-memory simulator"};
    app.require_subcommand(1);

    std::vector<std::string> config_paths;
    std::string scenario_name = "pim-capsnet";
    std::vector<std::string> scenario_names;
    std::uint64_t seed = 1;
    std::vector<double> freqs_mhz;
    std::string out_path, out_dir;
    bool trace = false;
    bool numerics = false;
    std::size_t n_samples = arith::kDefaultCalibrationSamples;
    double cal_lo = arith::kDefaultCalibrationLo, cal_hi = arith::kDefaultCalibrationHi;
    double freq_mhz = 312.5;

    auto add_common = [&](CLI::App* sub, bool multi_config) {
        if (multi_config)
            sub->add_option("--config", config_paths, "benchmark config file(s)")
                ->required();
        else
            sub->add_option("--config", config_paths, "benchmark config file")
                ->required()
                ->expected(1);
        sub->add_option("--seed", seed, "deterministic run seed");
        sub->add_option("--out", out_path, "output file (default stdout)");
        sub->add_option("--out-dir", out_dir, "output directory (or PIMCAPS_OUT_DIR)");
        sub->add_flag("--trace", trace, "emit per-request trace (large)");
    };

    auto* plan_cmd = app.add_subcommand("plan", "distribution-dimension cost report");
    add_common(plan_cmd, false);
    plan_cmd->add_option("--freq", freq_mhz, "vault clock in MHz");

    auto* sim_cmd = app.add_subcommand("simulate", "run one scenario");
    add_common(sim_cmd, false);
    sim_cmd->add_option("--scenario", scenario_name, "design scenario");
    sim_cmd->add_flag("--numerics", numerics, "execute the routing arithmetic too");

    auto* cal_cmd = app.add_subcommand("calibrate", "exponential recovery constants");
    cal_cmd->add_option("--samples", n_samples, "sample count (>= 1000)");
    cal_cmd->add_option("--lo", cal_lo, "range low end");
    cal_cmd->add_option("--hi", cal_hi, "range high end");
    cal_cmd->add_option("--seed", seed, "deterministic seed");
    cal_cmd->add_option("--out", out_path, "output file (default stdout)");

    auto* cmp_cmd = app.add_subcommand("compare", "scenario comparison table");
    add_common(cmp_cmd, true);
    cmp_cmd->add_option("--scenario", scenario_names, "scenarios to compare");

    auto* swp_cmd = app.add_subcommand("sweep", "frequency x dimension heat map");
    add_common(swp_cmd, false);
    swp_cmd->add_option("--freq", freqs_mhz, "vault clocks in MHz");

    CLI11_PARSE(app, argc, argv);

    const auto opt = tool_options(seed, out_dir, trace, numerics);

    try {
        std::vector<cli::BenchmarkConfig> cfgs;
        for (const auto& p : config_paths) cfgs.push_back(cli::load_config(p));

        if (plan_cmd->parsed()) {
            emit(cli::cmd_plan(cfgs.at(0), freq_mhz * 1e6), out_path, opt);
        } else if (sim_cmd->parsed()) {
            const auto s = sim::scenario_from_name(scenario_name);
            if (!s) {
                std::cerr << "unknown scenario '" << scenario_name << "'\n";
                return cli::kConfigError;
            }
            std::string trace_csv;
            emit(cli::cmd_simulate(cfgs.at(0), *s, opt, &trace_csv), out_path, opt);
            if (opt.trace && !trace_csv.empty())
                emit(trace_csv,
                     out_path.empty() ? std::string() : out_path + ".trace.csv", opt);
        } else if (cal_cmd->parsed()) {
            emit(cli::cmd_calibrate(n_samples, static_cast<float>(cal_lo),
                                    static_cast<float>(cal_hi), seed),
                 out_path, opt);
        } else if (cmp_cmd->parsed()) {
            std::vector<sim::Scenario> scs;
            for (const auto& n : scenario_names) {
                const auto s = sim::scenario_from_name(n);
                if (!s) {
                    std::cerr << "unknown scenario '" << n << "'\n";
                    return cli::kConfigError;
                }
                scs.push_back(*s);
            }
            if (scs.empty())
                scs = {sim::Scenario::BaselineModel, sim::Scenario::PIMIntra,
                       sim::Scenario::PIMInter, sim::Scenario::PIMCapsNet};
            emit(cli::compare_csv(cli::run_compare(cfgs, scs, opt)), out_path, opt);
        } else if (swp_cmd->parsed()) {
            auto o = opt;
            if (!freqs_mhz.empty()) {
                o.freqs_hz.clear();
                for (double f : freqs_mhz) o.freqs_hz.push_back(f * 1e6);
            }
            emit(cli::sweep_csv(cli::run_sweep(cfgs.at(0), o)), out_path, opt);
        }
    } catch (const cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kConfigError;
    } catch (const cli::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return cli::kIoError;
    } catch (const std::exception& e) {
        std::cerr << "simulation error: " << e.what() << '\n';
        return cli::kSimError;
    }
    return cli::kOk;
}
