#ifndef PIMCAPS_SIM_HPP
#define PIMCAPS_SIM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pimcaps/approx_arith.hpp"
#include "pimcaps/hmc.hpp"
#include "pimcaps/planner.hpp"
#include "pimcaps/routing.hpp"

namespace pimcaps::sim {

using caps::NetworkConfig;
using plan::Dim;
using plan::Stage;

/// Design points compared by the experiment runner.
///   BaselineModel: routing on the host, memory-bound streaming of the
///                  intermediate tensors over the external link.
///   PIMIntra:      in-memory PEs without the inter-vault distribution;
///                  operands stay interleaved across vaults, so most fetches
///                  cross the crossbar.
///   PIMInter:      inter-vault distribution without the intra-vault mapping
///                  fix; 16B sub-pages fan each PE burst across banks.
///   PIMCapsNet:    full design: distribution, matched sub-page indicator,
///                  adaptive host/PE scheduling.
///   AllInPIM:      every layer in memory; routing identical to PIMCapsNet.
///   RMASPimFirst / RMASGpuFirst: PIMCapsNet with fixed host-priority
///                  policies instead of the adaptive scheduler.
enum class Scenario {
    BaselineModel,
    PIMIntra,
    PIMInter,
    PIMCapsNet,
    AllInPIM,
    RMASPimFirst,
    RMASGpuFirst,
    RMASAdaptive, // alias of the adaptive policy used by PIMCapsNet
};

const char* scenario_name(Scenario s);
std::optional<Scenario> scenario_from_name(const std::string& name);

enum class SnippetRole { Slice, Aggregation };

/// One unit of distributed work: a stage slice assigned to a vault.
struct WorkloadSnippet {
    Stage stage = Stage::Predict;
    SnippetRole role = SnippetRole::Slice;
    std::size_t slice_begin = 0; // along the distribution dimension
    std::size_t slice_end = 0;
    std::size_t vault = 0;
    std::uint64_t op_count = 0;
    double bytes_in = 0.0;
    double bytes_out = 0.0;
};

struct SimMetrics {
    std::uint64_t total_cycles = 0;
    std::uint64_t compute_cycles = 0;
    std::uint64_t intervault_comm_cycles = 0;
    std::uint64_t vrs_cycles = 0;
    std::uint64_t host_stall_cycles = 0;
    double intervault_bytes = 0.0;
    double external_bytes = 0.0;
    double bank_accesses = 0.0;
    std::uint64_t total_ops = 0;
    double energy_rel = 0.0;
    std::vector<double> per_vault_busy;

    double seconds(double vault_freq) const {
        return static_cast<double>(total_cycles) / vault_freq;
    }
};

struct EnergyCoeffs {
    double pe_op = 1.0;
    double bank_access = 4.0;
    double crossbar_byte = 0.5;
    double external_byte = 2.0;
};

struct RunOptions {
    std::uint64_t seed = 1;
    bool with_numerics = false; // also execute the routing arithmetic
    bool with_trace = false;    // collect per-request queue trace rows
    arith::PEConfig pe;
    EnergyCoeffs energy;
    // Calibrated constants for the approximate exponential path.
    arith::ExpApproxParams exp_params =
        arith::calibrate_exp_recovery(arith::kDefaultCalibrationSamples,
                                      arith::kDefaultCalibrationLo,
                                      arith::kDefaultCalibrationHi, 12345);
};

struct RunResult {
    SimMetrics metrics;
    // Present when with_numerics is set: final H capsules and the provider
    // trace, bit-identical to the capsnet-core execution.
    std::optional<caps::RoutingResult> numerics;
    // Present when with_trace is set: CSV of the representative request
    // waves replayed through the vault queues, one row per completion.
    std::string trace_csv;
};

/// Slices every routing stage along the distribution dimension. Stages that
/// cannot split along it become per-vault pre-aggregation work plus a global
/// snippet on the designated vault (vault 0). Remainder imbalance of
/// divisible-scale extents is smoothed by re-splitting overloaded slices
/// along a secondary dimension (Rebalance snippets).
std::vector<WorkloadSnippet> partition_workload(const NetworkConfig& cfg, Dim dim,
                                                const hmc::HMCConfig& hmc);

/// Per-PE wave schedule for one vault's snippet: fills 16 PEs from the
/// primary slice, re-splitting along another permitted dimension when the
/// slice alone cannot occupy them.
struct PeSchedule {
    std::uint64_t waves = 0;
    std::uint32_t active_pes = 0; // in the last (or only) wave shape
};
PeSchedule intra_vault_schedule(std::uint64_t primary_units,
                                std::uint64_t secondary_units,
                                const hmc::HMCConfig& hmc);

/// Synthetic tensors for full-scale numeric runs. The agreement logits are
/// shared across the batch and grow with batch size and iteration count, so
/// the signal gain is damped to keep them inside the max-free softmax range
/// of the PE datapath at any bundled scale.
caps::RoutingInstance numeric_instance(const NetworkConfig& cfg, std::uint64_t seed);

/// Event-driven, cycle-approximate execution of the routing procedure under
/// a scenario. Deterministic for a fixed seed.
RunResult run_rp(const NetworkConfig& cfg, Dim dim, Scenario scenario,
                 const hmc::HMCConfig& hmc, const RunOptions& opt);

/// Two-stage pipeline: total = host + (n-1) * max(host, rp) + rp.
double pipeline_model(double host_latency_per_batch, double rp_latency_per_batch,
                      std::size_t n_batches);

/// energy_rel = sum of counts weighted by the coefficients.
double energy_model(double pe_ops, double bank_accesses, double crossbar_bytes,
                    double external_bytes, const EnergyCoeffs& c);

std::string metrics_to_json(const SimMetrics& m);

} // namespace pimcaps::sim

#endif
