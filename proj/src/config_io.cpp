#include "pimcaps/config_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pimcaps::cli {

double roofline_host_latency(const caps::NetworkConfig& net) {
    // Conv + PrimeCaps + decoder work scales with the primary-capsule count;
    // the constant anchors a 1152-capsule network near 400 MFLOPs per image.
    const double flops_per_image =
        4.0e8 * static_cast<double>(net.low_caps) / 1152.0;
    const double gpu_effective = 3584.0 * 1.19e9 * 0.35;
    return static_cast<double>(net.batch_size) * flops_per_image / gpu_effective;
}

double BenchmarkConfig::host_latency_s() const {
    return host_latency_per_batch_s > 0.0 ? host_latency_per_batch_s
                                          : roofline_host_latency(net);
}

namespace {

struct KvLine {
    std::string key;
    std::string value;
    int line = 0;
};

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<sim::Scenario> parse_scenarios(const std::string& value,
                                           const std::string& origin, int line) {
    std::vector<sim::Scenario> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto s = sim::scenario_from_name(item);
        if (!s) fail(origin, line, "unknown scenario '" + item + "'");
        out.push_back(*s);
    }
    return out;
}

BenchmarkConfig from_fields(const std::vector<KvLine>& fields, const std::string& origin) {
    BenchmarkConfig cfg;
    bool saw_positive_violation = false;
    int violation_line = 0;
    std::string violation_key;

    for (const auto& f : fields) {
        auto positive = [&](std::uint64_t v) {
            if (v < 1) {
                saw_positive_violation = true;
                violation_line = f.line;
                violation_key = f.key;
            }
            return static_cast<std::size_t>(v);
        };
        try {
            if (f.key == "name") {
                cfg.name = f.value;
            } else if (f.key == "batch_size") {
                cfg.net.batch_size = positive(std::stoull(f.value));
            } else if (f.key == "low_caps") {
                cfg.net.low_caps = positive(std::stoull(f.value));
            } else if (f.key == "high_caps") {
                cfg.net.high_caps = positive(std::stoull(f.value));
            } else if (f.key == "low_dim") {
                cfg.net.low_dim = positive(std::stoull(f.value));
            } else if (f.key == "high_dim") {
                cfg.net.high_dim = positive(std::stoull(f.value));
            } else if (f.key == "iterations") {
                cfg.net.iterations = positive(std::stoull(f.value));
            } else if (f.key == "host_latency_per_batch_ms") {
                cfg.host_latency_per_batch_s = std::stod(f.value) / 1e3;
            } else if (f.key == "scenarios") {
                cfg.scenarios = parse_scenarios(f.value, origin, f.line);
            } else if (f.key == "output") {
                cfg.output_path = f.value;
            } else {
                fail(origin, f.line, "unknown key '" + f.key + "'");
            }
        } catch (const std::invalid_argument&) {
            fail(origin, f.line, "malformed value for '" + f.key + "'");
        } catch (const std::out_of_range&) {
            fail(origin, f.line, "value out of range for '" + f.key + "'");
        }
    }
    if (saw_positive_violation)
        fail(origin, violation_line, "'" + violation_key + "' must be >= 1");
    if (cfg.name.empty()) fail(origin, 1, "missing 'name'");
    try {
        cfg.net.validate();
    } catch (const std::exception& e) {
        fail(origin, 1, e.what());
    }
    if (cfg.scenarios.empty())
        cfg.scenarios = {sim::Scenario::BaselineModel, sim::Scenario::PIMCapsNet};
    return cfg;
}

BenchmarkConfig parse_json_config(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    std::vector<KvLine> fields;
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::string v;
        if (it->is_string())
            v = it->get<std::string>();
        else
            v = it->dump();
        fields.push_back({it.key(), v, 1});
    }
    return from_fields(fields, origin);
}

} // namespace

BenchmarkConfig parse_config_text(const std::string& text, const std::string& origin) {
    const std::string t = trim(text);
    if (!t.empty() && t.front() == '{') return parse_json_config(text, origin);

    std::vector<KvLine> fields;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            fail(origin, lineno, "expected 'key = value'");
        fields.push_back({trim(s.substr(0, eq)), trim(s.substr(eq + 1)), lineno});
    }
    return from_fields(fields, origin);
}

BenchmarkConfig load_config(const std::string& path) {
    return parse_config_text(read_file(path), path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        if (!out.good()) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " -> " + path);
}

} // namespace pimcaps::cli
