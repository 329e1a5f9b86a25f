#ifndef PIMCAPS_CONFIG_IO_HPP
#define PIMCAPS_CONFIG_IO_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "pimcaps/routing.hpp"
#include "pimcaps/sim.hpp"

namespace pimcaps::cli {

/// Exit-code taxonomy of the command-line tool.
enum ExitCode { kOk = 0, kConfigError = 2, kSimError = 3, kIoError = 4 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One benchmark entry: network shape, host-stage latency and the scenarios
/// it should run under.
struct BenchmarkConfig {
    std::string name;
    caps::NetworkConfig net;
    double host_latency_per_batch_s = 0.0; // 0 = derive from the roofline estimate
    std::vector<sim::Scenario> scenarios;
    std::string output_path;

    double host_latency_s() const; // explicit value or roofline default
};

/// Parses a flat key=value file (or .json alternative). Unknown keys are
/// rejected; violations carry the offending line number.
BenchmarkConfig load_config(const std::string& path);
BenchmarkConfig parse_config_text(const std::string& text, const std::string& origin);

/// Simple roofline estimate of the host Conv/PrimeCaps/FC time per batch,
/// used when a config does not pin the latency explicitly.
double roofline_host_latency(const caps::NetworkConfig& net);

/// Atomic file write (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

} // namespace pimcaps::cli

#endif
