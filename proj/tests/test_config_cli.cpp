#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <chrono>
#include <json.hpp>

#include "pimcaps/commands.hpp"

using namespace pimcaps;
using namespace pimcaps::cli;

namespace {

const std::string kConfigDir = PIMCAPS_CONFIG_DIR;

std::string bundled(const std::string& name) {
    return kConfigDir + "/" + name + ".cfg";
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(PIMCAPS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("bundled benchmark files parse to their published shapes") {
    const auto mn1 = load_config(bundled("caps-mn1"));
    CHECK(mn1.net.batch_size == 100);
    CHECK(mn1.net.low_caps == 1152);
    CHECK(mn1.net.high_caps == 10);
    CHECK(mn1.net.iterations == 3);

    const auto cf3 = load_config(bundled("caps-cf3"));
    CHECK(cf3.net.batch_size == 100);
    CHECK(cf3.net.low_caps == 4608);
    CHECK(cf3.net.high_caps == 11);
    CHECK(cf3.net.iterations == 3);

    std::set<std::string> names;
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(kConfigDir)) {
        if (entry.path().extension() != ".cfg") continue;
        const auto cfg = load_config(entry.path().string());
        CHECK(cfg.net.low_dim == 8);
        CHECK(cfg.net.high_dim == 16);
        CHECK(cfg.host_latency_per_batch_s > 0.0);
        names.insert(cfg.name);
        ++count;
    }
    CHECK(count == 12);
    CHECK(names.size() == 12); // unique within the suite
}

TEST_CASE("config parser diagnostics carry line numbers") {
    SUBCASE("zero iterations rejected") {
        const std::string text =
            "name = bad\nbatch_size = 4\nlow_caps = 4\nhigh_caps = 2\niterations = 0\n";
        CHECK_THROWS_WITH_AS(parse_config_text(text, "bad.cfg"),
                             doctest::Contains("bad.cfg:5"), ConfigError);
    }
    SUBCASE("unknown keys rejected") {
        const std::string text = "name = x\nbatch_sizes = 4\n";
        CHECK_THROWS_WITH_AS(parse_config_text(text, "x.cfg"),
                             doctest::Contains("unknown key"), ConfigError);
    }
    SUBCASE("malformed lines rejected") {
        CHECK_THROWS_WITH_AS(parse_config_text("name = x\nbatch_size 4\n", "y.cfg"),
                             doctest::Contains("y.cfg:2"), ConfigError);
    }
    SUBCASE("missing name rejected") {
        CHECK_THROWS_AS(parse_config_text("batch_size = 4\n", "z.cfg"), ConfigError);
    }
    SUBCASE("unknown scenario rejected") {
        CHECK_THROWS_WITH_AS(
            parse_config_text("name = x\nscenarios = warp-drive\n", "s.cfg"),
            doctest::Contains("unknown scenario"), ConfigError);
    }
}

TEST_CASE("json configs are accepted as an alternative") {
    const std::string text = R"({
        "name": "caps-json",
        "batch_size": "8",
        "low_caps": "32",
        "high_caps": "4",
        "iterations": "2",
        "scenarios": "baseline,pim-capsnet"
    })";
    const auto cfg = parse_config_text(text, "caps.json");
    CHECK(cfg.name == "caps-json");
    CHECK(cfg.net.batch_size == 8);
    CHECK(cfg.net.low_caps == 32);
    CHECK(cfg.scenarios.size() == 2);
}

TEST_CASE("defaults are applied when optional keys are absent") {
    const auto cfg = parse_config_text(
        "name = tiny\nbatch_size = 2\nlow_caps = 4\nhigh_caps = 2\niterations = 1\n",
        "tiny.cfg");
    CHECK(cfg.net.low_dim == 8);
    CHECK(cfg.net.high_dim == 16);
    CHECK(cfg.scenarios.size() == 2); // baseline + full design
    CHECK(cfg.host_latency_per_batch_s == 0.0);
    CHECK(cfg.host_latency_s() > 0.0); // roofline estimate kicks in
}

TEST_CASE("plan command emits three rows and one selection") {
    const auto cfg = load_config(bundled("caps-mn1"));
    const std::string csv = cmd_plan(cfg, 312.5e6);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "dim,E,M,S,selected");
    int rows = 0, marks = 0;
    while (std::getline(in, line)) {
        ++rows;
        if (line.size() >= 2 && line.substr(line.size() - 2) == ",1") ++marks;
    }
    CHECK(rows == 3);
    CHECK(marks == 1);

    // values equal a fresh in-process computation
    const auto mem = hmc_at_frequency(312.5e6);
    const auto fresh = plan::select_dimension(cfg.net, cost_params_at(mem));
    CHECK(csv == plan::cost_report_csv(fresh));
}

TEST_CASE("simulate command is byte-stable for a fixed seed") {
    auto cfg = load_config(bundled("caps-sv1"));
    ToolOptions opt;
    opt.seed = 5;
    const std::string a = cmd_simulate(cfg, sim::Scenario::PIMCapsNet, opt);
    const std::string b = cmd_simulate(cfg, sim::Scenario::PIMCapsNet, opt);
    CHECK(a == b);
    CHECK(a.find("total_cycles") != std::string::npos);
}

TEST_CASE("compare table normalizes against the host baseline") {
    std::vector<BenchmarkConfig> cfgs = {load_config(bundled("caps-sv1"))};
    ToolOptions opt;
    const auto rows = run_compare(
        cfgs, {sim::Scenario::BaselineModel, sim::Scenario::PIMCapsNet}, opt);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].scenario == "baseline");
    CHECK(rows[0].speedup == doctest::Approx(1.0));
    CHECK(rows[0].energy_norm == doctest::Approx(1.0));
    CHECK(rows[1].scenario == "pim-capsnet");
    CHECK(rows[1].speedup > 1.0);
    CHECK(rows[1].energy_norm < 1.0);
    const std::string csv = compare_csv(rows);
    CHECK(csv.find("config,scenario,rp_cycles,speedup,energy_norm") == 0);
}

TEST_CASE("sweep emits a full frequency-by-dimension grid") {
    const auto cfg = load_config(bundled("caps-sv3"));
    ToolOptions opt;
    const auto cells = run_sweep(cfg, opt);
    REQUIRE(cells.size() == 9); // 3 frequencies x 3 dimensions
    int planner_marks = 0, best_marks = 0;
    for (const auto& c : cells) {
        planner_marks += c.planner_choice;
        best_marks += c.sim_best;
        CHECK(c.total_cycles > 0);
        CHECK(c.speedup > 0);
    }
    CHECK(planner_marks == 3);
    CHECK(best_marks == 3);
}

TEST_CASE("calibrate command emits an importable record") {
    const std::string text = cmd_calibrate(10000, -5.0f, 5.0f, 7);
    const auto params = arith::exp_params_from_json(text);
    CHECK(params.recovery_factor > 0.0f);
    CHECK(cmd_calibrate(10000, -5.0f, 5.0f, 7) == text); // deterministic
}

TEST_CASE("the tool's exit codes separate config, io and usage failures") {
    CHECK(run_cli("plan --config " + bundled("caps-mn1")) == kOk);
    CHECK(run_cli("plan --config /nonexistent/missing.cfg") == kIoError);

    const auto tmp = std::filesystem::temp_directory_path() / "pimcaps_bad.cfg";
    {
        std::ofstream out(tmp);
        out << "name = bad\niterations = 0\n";
    }
    CHECK(run_cli("plan --config " + tmp.string()) == kConfigError);
    CHECK(run_cli("simulate --config " + bundled("caps-sv1") +
                  " --scenario warp-drive") == kConfigError);
    std::filesystem::remove(tmp);
}

TEST_CASE("outputs are written atomically to the requested path") {
    const auto dir = std::filesystem::temp_directory_path() / "pimcaps_out_test";
    std::filesystem::remove_all(dir);
    const auto out = dir / "plan.csv";
    CHECK(run_cli("plan --config " + bundled("caps-mn1") + " --out " + out.string()) ==
          kOk);
    CHECK(std::filesystem::exists(out));
    CHECK(!std::filesystem::exists(out.string() + ".tmp"));
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "dim,E,M,S,selected");
    std::filesystem::remove_all(dir);
}

TEST_CASE("full-design speedup exceeds one on every bundled config") {
    std::vector<BenchmarkConfig> cfgs;
    for (const auto& entry : std::filesystem::directory_iterator(kConfigDir))
        if (entry.path().extension() == ".cfg")
            cfgs.push_back(load_config(entry.path().string()));
    REQUIRE(cfgs.size() == 12);
    ToolOptions opt;
    const auto rows = run_compare(
        cfgs, {sim::Scenario::BaselineModel, sim::Scenario::PIMCapsNet}, opt);
    CHECK(rows.size() == cfgs.size() * 2); // rows = configs x scenarios
    for (const auto& r : rows) {
        if (r.scenario == "baseline") {
            CHECK(r.speedup == doctest::Approx(1.0));
        } else {
            CHECK(r.speedup > 1.0);
            CHECK(r.energy_norm < 1.0);
        }
    }
}

TEST_CASE("sweep best cells track the planner at the outer frequencies") {
    // the middle clock sits inside the planner/simulator crossover band for
    // the smallest shapes, so agreement is asserted at the sweep's ends
    ToolOptions opt;
    int agree_lo = 0, agree_hi = 0, total = 0;
    for (const auto& entry : std::filesystem::directory_iterator(kConfigDir)) {
        if (entry.path().extension() != ".cfg") continue;
        const auto cfg = load_config(entry.path().string());
        const auto cells = run_sweep(cfg, opt);
        REQUIRE(cells.size() == 9);
        auto match_at = [&](std::size_t f) {
            for (std::size_t d = 0; d < 3; ++d) {
                const auto& c = cells[f * 3 + d];
                if (c.sim_best && c.planner_choice) return true;
            }
            return false;
        };
        agree_lo += match_at(0);
        agree_hi += match_at(2);
        ++total;
    }
    CHECK(total == 12);
    CHECK(agree_lo >= 10);
    CHECK(agree_hi >= 10);
}

TEST_CASE("simulating every bundled config with numerics fits the budget") {
    const auto start = std::chrono::steady_clock::now();
    for (const auto& entry : std::filesystem::directory_iterator(kConfigDir)) {
        if (entry.path().extension() != ".cfg") continue;
        CHECK(run_cli("simulate --config " + entry.path().string() +
                      " --scenario pim-capsnet --numerics --seed 3") == kOk);
    }
    const double t =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(t < 600.0);
}

TEST_CASE("metrics json carries exactly the documented fields") {
    const auto cfg = load_config(bundled("caps-en3"));
    ToolOptions opt;
    const std::string text = cmd_simulate(cfg, sim::Scenario::PIMIntra, opt);
    const auto j = nlohmann::json::parse(text);
    const std::set<std::string> want = {
        "total_cycles",     "compute_cycles", "intervault_comm_cycles",
        "vrs_cycles",       "host_stall_cycles", "intervault_bytes",
        "external_bytes",   "bank_accesses",  "total_ops",
        "energy_rel",       "per_vault_busy"};
    std::set<std::string> got;
    for (auto it = j.begin(); it != j.end(); ++it) got.insert(it.key());
    CHECK(got == want);
    // undistributed in-memory execution pays crossbar time for its operands
    CHECK(j["intervault_comm_cycles"].get<std::uint64_t>() > 0);
}
