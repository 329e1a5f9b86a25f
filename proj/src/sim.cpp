#include "pimcaps/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pimcaps/rmas.hpp"

namespace pimcaps::sim {

namespace {

// Host processor model for the reference scenario: effective arithmetic
// throughput and the fraction of the external bandwidth an LDST-bound,
// synchronization-heavy kernel actually sustains.
constexpr double kGpuOpsPerSec = 3584.0 * 1.19e9;
constexpr double kGpuBwEfficiency = 0.25;

// Host-side impact factors of the access scheduler: the pipelined host
// layers are fetch-heavy while the PEs run compute phases.
constexpr double kGammaHost = 2.0;
constexpr double kGammaVault = 1.0;

struct VaultWork {
    std::uint64_t ops = 0; // conserved scalar-operation units
    double cycles = 0.0;   // PE cycles before dividing across PEs
    std::uint64_t units = 0;
    std::uint64_t agg_ops = 0; // portion landed by global aggregation
};

struct StagePlan {
    Stage stage = Stage::Predict;
    bool per_iteration = false;
    std::vector<VaultWork> vaults;
    double comm_in_bytes = 0.0;  // per iteration, converging on vault 0
    double comm_out_bytes = 0.0; // per iteration, leaving vault 0
    double unit_operand_bytes = 0.0;
    double unit_cycles = 1.0;
    std::uint64_t stride_blocks = 1; // natural operand stride
};

struct WholePlan {
    std::vector<StagePlan> stages;
    std::uint64_t total_ops = 0;
};

// Spreads T units over min(N, V) vaults evenly; remainder slices of
// divisible-scale extents are re-split along a secondary dimension, so the
// share granularity is the unit, not the slice.
std::vector<std::uint64_t> split_units(std::uint64_t total, std::size_t extent,
                                       std::size_t n_vaults) {
    std::vector<std::uint64_t> share(n_vaults, 0);
    const std::size_t active = std::min<std::size_t>(std::max<std::size_t>(extent, 1), n_vaults);
    const std::uint64_t base = total / active;
    const std::uint64_t rem = total % active;
    for (std::size_t v = 0; v < active; ++v)
        share[v] = base + (v < rem ? 1 : 0);
    return share;
}

void add_shares(StagePlan& plan, const std::vector<std::uint64_t>& ops,
                double cycles_per_op) {
    for (std::size_t v = 0; v < ops.size(); ++v) {
        plan.vaults[v].ops += ops[v];
        plan.vaults[v].cycles += static_cast<double>(ops[v]) * cycles_per_op;
    }
}

void add_units(StagePlan& plan, const std::vector<std::uint64_t>& units) {
    for (std::size_t v = 0; v < units.size(); ++v)
        plan.vaults[v].units += units[v];
}

WholePlan build_plan(const NetworkConfig& cfg, Dim dim, const hmc::HMCConfig& mem,
                     const arith::PEConfig& pe) {
    cfg.validate();
    mem.validate();
    const std::size_t V = mem.n_vaults;
    const std::uint64_t NB = cfg.batch_size, NL = cfg.low_caps, NH = cfg.high_caps;
    const std::uint64_t CL = cfg.low_dim, CH = cfg.high_dim, I = cfg.iterations;
    const std::uint64_t lat_exp = arith::pe_flow_latency(arith::PeFlow::EXP, pe);
    const std::uint64_t lat_inv = arith::pe_flow_latency(arith::PeFlow::INVSQRT, pe);
    const std::uint64_t lat_div = arith::pe_flow_latency(arith::PeFlow::DIV, pe);

    const std::size_t active_b = std::min<std::size_t>(NB, V);
    const std::size_t active_l = std::min<std::size_t>(NL, V);
    const std::size_t active_h = std::min<std::size_t>(NH, V);
    const bool multi = V > 1;

    auto dim_extent = [&](Dim d) -> std::size_t {
        switch (d) {
            case Dim::B: return NB;
            case Dim::L: return NL;
            case Dim::H: return NH;
        }
        return 1;
    };

    WholePlan out;

    // --- Predict: u x W, splittable along every dimension.
    {
        StagePlan p;
        p.stage = Stage::Predict;
        p.per_iteration = false;
        p.vaults.resize(V);
        const std::uint64_t ops = NB * NL * NH * CH * (2 * CL - 1);
        add_shares(p, split_units(ops, dim_extent(dim), V), 1.0);
        add_units(p, split_units(NB * NL * NH, dim_extent(dim), V));
        p.unit_cycles = static_cast<double>(CH * (2 * CL - 1));
        // u rows reused across j, weight blocks across the batch
        p.unit_operand_bytes = static_cast<double>((CH + CL) * 4);
        p.stride_blocks = std::max<std::uint64_t>(1, CL * CH * 4 / 16);
        out.stages.push_back(std::move(p));
    }

    // --- Softmax: parallelizable along L only.
    {
        StagePlan p;
        p.stage = Stage::Softmax;
        p.per_iteration = true;
        p.vaults.resize(V);
        const std::uint64_t exps = I * NL * NH;
        const std::uint64_t divs = I * NL * NH;
        const std::uint64_t adds = I * NL * (NH - 1);
        if (dim == Dim::L) {
            add_shares(p, split_units(exps, NL, V), static_cast<double>(lat_exp));
            add_shares(p, split_units(divs, NL, V), static_cast<double>(lat_div));
            add_shares(p, split_units(adds, NL, V), 1.0);
            add_units(p, split_units(I * NL, NL, V));
        } else if (dim == Dim::B) {
            // b is gathered to the designated vault, which runs the whole
            // softmax and scatters c back.
            p.vaults[0].ops += exps + divs + adds;
            p.vaults[0].agg_ops += exps + divs + adds;
            p.vaults[0].cycles += static_cast<double>(exps) * lat_exp +
                                  static_cast<double>(divs) * lat_div +
                                  static_cast<double>(adds);
            p.vaults[0].units += I * NL;
            if (multi) {
                p.comm_in_bytes = static_cast<double>((V - 1) * NL * NH) * (4.0 + 16.0);
                p.comm_out_bytes = static_cast<double>((V - 1) * NL * NH) * (4.0 + 16.0);
            }
        } else { // H: local exponentials and partial row sums, star-reduced
                 // normalizers on the designated vault
            add_shares(p, split_units(exps, NH, V), static_cast<double>(lat_exp));
            add_shares(p, split_units(divs, NH, V), static_cast<double>(lat_div));
            const std::uint64_t local_adds = I * NL * (NH - active_h);
            const std::uint64_t star_adds = I * NL * (active_h - 1);
            add_shares(p, split_units(local_adds, NH, V), 1.0);
            p.vaults[0].ops += star_adds;
            p.vaults[0].agg_ops += star_adds;
            p.vaults[0].cycles += static_cast<double>(star_adds);
            add_units(p, split_units(I * NL, NH, V));
            if (multi) {
                p.comm_in_bytes = static_cast<double>((V - 1) * NL) * (4.0 + 16.0);
                p.comm_out_bytes = static_cast<double>(NL) * (4.0 + 16.0);
            }
        }
        p.unit_cycles = static_cast<double>(NH * lat_exp + NH * lat_div + (NH - 1));
        p.unit_operand_bytes = static_cast<double>(NH * 8);
        p.stride_blocks = std::max<std::uint64_t>(1, NH * 4 / 16);
        out.stages.push_back(std::move(p));
    }

    // --- Weighted sum: splittable along B and H; along L each vault forms
    // partial sums over its low capsules, star-combined on vault 0.
    {
        StagePlan p;
        p.stage = Stage::WeightedSum;
        p.per_iteration = true;
        p.vaults.resize(V);
        const std::uint64_t muls = I * NB * NH * CH * NL;
        const std::uint64_t adds = I * NB * NH * CH * (NL - 1);
        if (dim == Dim::L) {
            add_shares(p, split_units(muls, NL, V), 1.0);
            const std::uint64_t local_adds = I * NB * NH * CH * (NL - active_l);
            const std::uint64_t star_adds = I * NB * NH * CH * (active_l - 1);
            add_shares(p, split_units(local_adds, NL, V), 1.0);
            p.vaults[0].ops += star_adds;
            p.vaults[0].agg_ops += star_adds;
            p.vaults[0].cycles += static_cast<double>(star_adds);
            add_units(p, split_units(I * NB * NH, NL, V));
        } else {
            const std::size_t ext = dim_extent(dim);
            add_shares(p, split_units(muls + adds, ext, V), 1.0);
            add_units(p, split_units(I * NB * NH, ext, V));
        }
        p.unit_cycles = static_cast<double>(CH * (2 * NL - 1));
        p.unit_operand_bytes = static_cast<double>(NL * CH * 4 + CH * 4);
        p.stride_blocks = std::max<std::uint64_t>(1, NH * CH * 4 / 16);
        out.stages.push_back(std::move(p));
    }

    // --- Squash: splittable along B and H; under an L distribution the
    // gathered s is squashed on the designated vault and v broadcast back.
    {
        StagePlan p;
        p.stage = Stage::Squash;
        p.per_iteration = true;
        p.vaults.resize(V);
        const std::uint64_t pairs = I * NB * NH;
        const std::uint64_t ops = pairs * (3 * CH + 19);
        const double cyc_per_pair =
            static_cast<double>((2 * CH - 1) + CH + lat_inv + lat_div + 2);
        const double cyc_per_op = cyc_per_pair / static_cast<double>(3 * CH + 19);
        if (dim == Dim::L) {
            p.vaults[0].ops += ops;
            p.vaults[0].agg_ops += ops;
            p.vaults[0].cycles += static_cast<double>(pairs) * cyc_per_pair;
            p.vaults[0].units += pairs;
            if (multi) {
                p.comm_in_bytes =
                    static_cast<double>(NB * (V - 1) * NH) * (4.0 * CH + 16.0);
                p.comm_out_bytes =
                    static_cast<double>(NB * (V - 1) * NH) * (4.0 * CH + 16.0);
            }
        } else {
            const std::size_t ext = dim_extent(dim);
            add_shares(p, split_units(ops, ext, V), cyc_per_op);
            add_units(p, split_units(pairs, ext, V));
        }
        p.unit_cycles = cyc_per_pair;
        p.unit_operand_bytes = static_cast<double>(2 * CH * 4);
        p.stride_blocks = std::max<std::uint64_t>(1, CH * 4 / 16);
        out.stages.push_back(std::move(p));
    }

    // --- Agreement: dot products split along any dimension; the batch
    // reduction into b is local unless the batch axis itself is distributed.
    {
        StagePlan p;
        p.stage = Stage::Agreement;
        p.per_iteration = true;
        p.vaults.resize(V);
        const std::uint64_t dots = I * NB * NL * NH * (2 * CH - 1);
        const std::uint64_t reduce = I * NL * NH * (NB - 1);
        const std::size_t ext = dim_extent(dim);
        add_shares(p, split_units(dots, ext, V), 1.0);
        add_units(p, split_units(I * NB * NL * NH, ext, V));
        if (dim == Dim::B) {
            const std::uint64_t local = I * NL * NH * (NB - active_b);
            const std::uint64_t star = I * NL * NH * (active_b - 1);
            add_shares(p, split_units(local, NB, V), 1.0);
            p.vaults[0].ops += star;
            p.vaults[0].agg_ops += star;
            p.vaults[0].cycles += static_cast<double>(star);
        } else {
            add_shares(p, split_units(reduce, ext, V), 1.0);
        }
        p.unit_cycles = static_cast<double>(2 * CH - 1);
        // one prediction row per dot; the v row is reused across low capsules
        p.unit_operand_bytes = static_cast<double>(CH * 4);
        p.stride_blocks = std::max<std::uint64_t>(1, NH * CH * 4 / 16);
        out.stages.push_back(std::move(p));
    }

    for (const auto& s : out.stages)
        for (const auto& v : s.vaults) out.total_ops += v.ops;
    return out;
}

struct ScenarioTraits {
    bool in_memory = true;
    bool distributed = true;    // inter-vault level design present
    bool matched_subpage = true; // sub-page indicator sized to the PE burst
    int rmas_policy = 0;        // 0 adaptive, 1 pim-first, 2 gpu-first
};

ScenarioTraits traits_of(Scenario s) {
    switch (s) {
        case Scenario::BaselineModel: return {false, false, false, 0};
        case Scenario::PIMIntra: return {true, false, true, 0};
        case Scenario::PIMInter: return {true, true, false, 0};
        case Scenario::PIMCapsNet: return {true, true, true, 0};
        case Scenario::AllInPIM: return {true, true, true, 0};
        case Scenario::RMASPimFirst: return {true, true, true, 1};
        case Scenario::RMASGpuFirst: return {true, true, true, 2};
        case Scenario::RMASAdaptive: return {true, true, true, 0};
    }
    throw std::invalid_argument("unknown scenario");
}

struct WaveProbe {
    double cycles = 0.0;
    double vrs = 0.0;
    std::uint64_t blocks = 0; // blocks touched per unit
    std::vector<hmc::CompletedRequest> completions;
};

// Replays one wave of 16 concurrent PE fetches through the vault queue
// model: matched sub-pages rotate PEs across banks; 16B sub-pages fan each
// operand across banks at the tensor's natural stride.
WaveProbe probe_wave(const hmc::HMCConfig& mem, bool matched, double unit_bytes,
                     std::uint64_t stride_blocks) {
    WaveProbe out;
    const std::uint64_t total_blocks =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(
                                       std::ceil(unit_bytes / 16.0)));
    out.blocks = total_blocks;
    // the access pattern repeats; probe a bounded window and scale
    const std::uint64_t blocks = std::min<std::uint64_t>(total_blocks, 64);
    const double scale =
        static_cast<double>(total_blocks) / static_cast<double>(blocks);

    hmc::HMCConfig probe_cfg = mem;
    probe_cfg.n_vaults = 32; // full array; the probe stays inside vault 0
    hmc::VaultArray vaults(probe_cfg);
    const std::size_t pes = mem.pes_per_vault;

    if (matched) {
        // operands re-tiled per PE into indicator-sized sub-pages
        unsigned k = 0;
        while ((1ull << k) < blocks && k < 4) ++k;
        const std::uint64_t sp_blocks = 1ull << k;
        const std::uint64_t reqs = (blocks + sp_blocks - 1) / sp_blocks;
        for (std::size_t p = 0; p < pes; ++p) {
            for (std::uint64_t r = 0; r < reqs; ++r) {
                hmc::MemoryRequest q;
                q.pe_vault = 0;
                q.pe_id = static_cast<std::uint32_t>(p);
                q.indicator = k;
                q.n_blocks = static_cast<std::uint32_t>(
                    std::min<std::uint64_t>(sp_blocks, blocks - r * sp_blocks));
                q.address = (static_cast<std::uint64_t>(p) * reqs + r) * sp_blocks * 16;
                vaults.enqueue(q, hmc::MapMode::Proposed);
            }
        }
    } else {
        // no indicator: every block is its own request at the raw stride
        for (std::size_t p = 0; p < pes; ++p) {
            for (std::uint64_t n = 0; n < blocks; ++n) {
                hmc::MemoryRequest q;
                q.pe_vault = 0;
                q.pe_id = static_cast<std::uint32_t>(p);
                q.indicator = 0;
                q.n_blocks = 1;
                q.address = (static_cast<std::uint64_t>(p) * stride_blocks + n) * 16;
                vaults.enqueue(q, hmc::MapMode::Proposed);
            }
        }
    }
    auto done = vaults.drain(0);
    std::uint64_t finish = 0;
    for (const auto& c : done) finish = std::max(finish, c.complete_cycle);
    out.cycles = static_cast<double>(finish) * scale;
    out.vrs = static_cast<double>(vaults.total_vrs()) * scale;
    out.completions = std::move(done);
    return out;
}

SimMetrics run_baseline(const NetworkConfig& cfg, const hmc::HMCConfig& mem,
                        const RunOptions& opt, const WholePlan& plan) {
    const double NB = static_cast<double>(cfg.batch_size);
    const double NL = static_cast<double>(cfg.low_caps);
    const double NH = static_cast<double>(cfg.high_caps);
    const double CL = static_cast<double>(cfg.low_dim);
    const double CH = static_cast<double>(cfg.high_dim);
    const double I = static_cast<double>(cfg.iterations);

    const double u_bytes = NB * NL * CL * 4;
    const double w_bytes = NL * NH * CL * CH * 4;
    const double uhat_bytes = NB * NL * NH * CH * 4;
    const double sv_bytes = NB * NH * CH * 4;
    const double bc_bytes = NL * NH * 4;
    // intermediate variables exceed on-chip storage, so each iteration
    // re-streams them from device memory
    const double streamed = w_bytes + u_bytes + uhat_bytes +
                            I * (2 * uhat_bytes + 2 * sv_bytes + 2 * bc_bytes);

    const double ops = static_cast<double>(plan.total_ops);
    const double mem_s = streamed / (mem.external_bw * kGpuBwEfficiency);
    const double alu_s = ops / kGpuOpsPerSec;

    SimMetrics m;
    m.compute_cycles = static_cast<std::uint64_t>(std::ceil(alu_s * mem.vault_freq));
    m.total_cycles =
        static_cast<std::uint64_t>(std::ceil((mem_s + alu_s) * mem.vault_freq));
    m.total_ops = plan.total_ops;
    m.external_bytes = streamed;
    m.bank_accesses = streamed / 16.0;
    m.energy_rel = energy_model(ops, m.bank_accesses, 0.0, streamed, opt.energy);
    m.per_vault_busy.assign(mem.n_vaults, 0.0);
    return m;
}

} // namespace

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::BaselineModel: return "baseline";
        case Scenario::PIMIntra: return "pim-intra";
        case Scenario::PIMInter: return "pim-inter";
        case Scenario::PIMCapsNet: return "pim-capsnet";
        case Scenario::AllInPIM: return "all-in-pim";
        case Scenario::RMASPimFirst: return "rmas-pim-first";
        case Scenario::RMASGpuFirst: return "rmas-gpu-first";
        case Scenario::RMASAdaptive: return "rmas-adaptive";
    }
    return "?";
}

std::optional<Scenario> scenario_from_name(const std::string& name) {
    for (Scenario s : {Scenario::BaselineModel, Scenario::PIMIntra, Scenario::PIMInter,
                       Scenario::PIMCapsNet, Scenario::AllInPIM, Scenario::RMASPimFirst,
                       Scenario::RMASGpuFirst, Scenario::RMASAdaptive})
        if (name == scenario_name(s)) return s;
    return std::nullopt;
}

caps::RoutingInstance numeric_instance(const NetworkConfig& cfg, std::uint64_t seed) {
    const double growth = static_cast<double>(cfg.batch_size) *
                          static_cast<double>(cfg.iterations);
    const double damp = std::min(1.0, 96.0 / growth);
    return caps::make_labeled_instance(cfg, seed, 1.0 * damp, 0.4 * damp);
}

std::vector<WorkloadSnippet> partition_workload(const NetworkConfig& cfg, Dim dim,
                                                const hmc::HMCConfig& mem) {
    const WholePlan plan = build_plan(cfg, dim, mem, arith::PEConfig{});
    const std::size_t V = mem.n_vaults;

    auto extent_of = [&](Dim d) -> std::size_t {
        switch (d) {
            case Dim::B: return cfg.batch_size;
            case Dim::L: return cfg.low_caps;
            case Dim::H: return cfg.high_caps;
        }
        return 1;
    };
    const std::size_t N = extent_of(dim);
    const std::size_t chunk = (N + V - 1) / V; // ceiling split

    std::vector<WorkloadSnippet> out;
    for (const auto& sp : plan.stages) {
        // Global-aggregation work and its traffic live on the designated vault.
        const std::uint64_t agg_ops = sp.vaults[0].agg_ops;
        const bool has_agg =
            agg_ops > 0 || sp.comm_in_bytes > 0 || sp.comm_out_bytes > 0;
        for (std::size_t v = 0; v < V; ++v) {
            const std::size_t begin = std::min(N, v * chunk);
            const std::size_t end = std::min(N, begin + chunk);
            const std::uint64_t ops =
                sp.vaults[v].ops - (v == 0 ? agg_ops : 0);
            if (ops == 0 && begin == end) continue;
            WorkloadSnippet s;
            s.stage = sp.stage;
            s.role = SnippetRole::Slice;
            s.slice_begin = begin;
            s.slice_end = end;
            s.vault = v;
            s.op_count = ops;
            out.push_back(s);
        }
        if (has_agg) {
            WorkloadSnippet s;
            s.stage = sp.stage;
            s.role = SnippetRole::Aggregation;
            s.vault = 0;
            s.op_count = agg_ops;
            s.bytes_in = sp.comm_in_bytes * static_cast<double>(cfg.iterations);
            s.bytes_out = sp.comm_out_bytes * static_cast<double>(cfg.iterations);
            out.push_back(s);
        }
    }
    return out;
}

PeSchedule intra_vault_schedule(std::uint64_t primary_units,
                                std::uint64_t secondary_units,
                                const hmc::HMCConfig& mem) {
    PeSchedule s;
    const std::uint64_t pes = mem.pes_per_vault;
    std::uint64_t units = primary_units;
    if (units < pes && secondary_units > 1)
        units = primary_units * secondary_units; // re-split along another dimension
    if (units == 0) return s;
    s.waves = (units + pes - 1) / pes;
    s.active_pes = static_cast<std::uint32_t>(std::min<std::uint64_t>(units, pes));
    return s;
}

double pipeline_model(double host_latency_per_batch, double rp_latency_per_batch,
                      std::size_t n_batches) {
    if (n_batches < 1)
        throw std::invalid_argument("pipeline_model: need at least one batch");
    return host_latency_per_batch +
           static_cast<double>(n_batches - 1) *
               std::max(host_latency_per_batch, rp_latency_per_batch) +
           rp_latency_per_batch;
}

double energy_model(double pe_ops, double bank_accesses, double crossbar_bytes,
                    double external_bytes, const EnergyCoeffs& c) {
    if (c.pe_op < 0 || c.bank_access < 0 || c.crossbar_byte < 0 || c.external_byte < 0)
        throw std::invalid_argument("energy_model: coefficients must be >= 0");
    return pe_ops * c.pe_op + bank_accesses * c.bank_access +
           crossbar_bytes * c.crossbar_byte + external_bytes * c.external_byte;
}

RunResult run_rp(const NetworkConfig& cfg, Dim dim, Scenario scenario,
                 const hmc::HMCConfig& mem, const RunOptions& opt) {
    cfg.validate();
    mem.validate();
    const ScenarioTraits tr = traits_of(scenario);
    const WholePlan plan = build_plan(cfg, dim, mem, opt.pe);
    const std::size_t V = mem.n_vaults;
    const double pes = static_cast<double>(mem.pes_per_vault);
    const double I = static_cast<double>(cfg.iterations);

    RunResult result;
    if (!tr.in_memory) {
        result.metrics = run_baseline(cfg, mem, opt, plan);
        if (opt.with_numerics) {
            const auto inst = numeric_instance(cfg, opt.seed);
            result.numerics =
                caps::dynamic_routing(inst.u, inst.W, cfg, caps::ExactProvider{});
        }
        return result;
    }

    SimMetrics m;
    m.total_ops = plan.total_ops;
    m.per_vault_busy.assign(V, 0.0);
    std::vector<double> vault_compute(V, 0.0);

    double total = 0.0, compute = 0.0, comm = 0.0, stall = 0.0;
    double bank_blocks = 0.0, crossbar_bytes = 0.0, remote_bytes = 0.0;

    if (opt.with_trace) result.trace_csv = hmc::trace_header();

    for (const auto& sp : plan.stages) {
        const double iters = sp.per_iteration ? I : 1.0;
        const WaveProbe probe =
            probe_wave(mem, tr.matched_subpage, sp.unit_operand_bytes, sp.stride_blocks);
        if (opt.with_trace)
            for (const auto& c : probe.completions)
                result.trace_csv += hmc::trace_row(c);

        double stage_compute = 0.0, stage_time = 0.0;
        double stage_bytes = 0.0;
        for (std::size_t v = 0; v < V; ++v) {
            const double comp = sp.vaults[v].cycles / pes / iters;
            const double units = static_cast<double>(sp.vaults[v].units) / iters;
            const double waves = std::ceil(units / pes);
            const double memt = waves * probe.cycles;
            stage_compute = std::max(stage_compute, comp);
            stage_time = std::max(stage_time, std::max(comp, memt));
            vault_compute[v] += comp * iters;
            stage_bytes += units * static_cast<double>(probe.blocks) * 16.0;
        }
        bank_blocks += (stage_bytes / 16.0) * iters;

        compute += stage_compute * iters;
        total += stage_time * iters;
        // memory time the PEs could not hide behind compute
        stall += (stage_time - stage_compute) * iters;

        if (tr.distributed) {
            const double in_b = sp.comm_in_bytes, out_b = sp.comm_out_bytes;
            if (in_b > 0 || out_b > 0) {
                const double c_in = static_cast<double>(hmc::crossbar_cost(in_b, mem));
                const double c_out = static_cast<double>(hmc::crossbar_cost(out_b, mem));
                comm += (c_in + c_out) * iters;
                crossbar_bytes += (in_b + out_b) * iters;
            }
        } else if (V > 1) {
            // no distribution: operands stay interleaved across vaults and
            // stream through the crossbar at the aggregate rate
            const double remote = stage_bytes * iters *
                                  (static_cast<double>(V - 1) / static_cast<double>(V));
            remote_bytes += remote;
            comm += static_cast<double>(hmc::crossbar_cost_aggregate(remote, mem));
        }
    }

    // Host/PE contention: one pipelined host fetch per iteration, priority
    // decided by the access scheduler.
    {
        const double u_bytes = static_cast<double>(cfg.batch_size * cfg.low_caps *
                                                   cfg.low_dim * 4);
        const double v_bytes = static_cast<double>(cfg.batch_size * cfg.high_caps *
                                                   cfg.high_dim * 4);
        const std::size_t n_max = std::min<std::size_t>(4, V);
        const double host_ops_per_iter =
            std::ceil((u_bytes + v_bytes) / I / (static_cast<double>(n_max) * 256.0));
        rmas::SchedulerInput in;
        in.n_max = n_max;
        in.q_bar = static_cast<double>(mem.pes_per_vault);
        in.q_per_vault.assign(n_max, in.q_bar);
        in.gamma_v = kGammaVault;
        in.gamma_h = kGammaHost;
        std::size_t nh = 0;
        switch (tr.rmas_policy) {
            case 0: nh = rmas::optimal_nh(in); break;
            case 1: nh = 0; break;
            case 2: nh = n_max; break;
        }
        const double lat = static_cast<double>(mem.bank_access_latency);
        const double per_op_pe = static_cast<double>(nh) * in.q_bar * lat;
        const double per_op_host =
            (nh == 0 ? static_cast<double>(n_max) / rmas::kSerialDeferral
                     : static_cast<double>(n_max) / static_cast<double>(nh)) *
            lat;
        const double n_ops = host_ops_per_iter * I;
        const double pe_stall = per_op_pe * n_ops;
        m.host_stall_cycles = static_cast<std::uint64_t>(per_op_host * n_ops);
        total += pe_stall;
        stall += pe_stall;
    }

    m.vrs_cycles = static_cast<std::uint64_t>(std::llround(stall));
    m.total_cycles = static_cast<std::uint64_t>(std::llround(total + comm));
    m.compute_cycles = static_cast<std::uint64_t>(std::llround(compute));
    m.intervault_comm_cycles = static_cast<std::uint64_t>(std::llround(comm));
    m.intervault_bytes = tr.distributed ? crossbar_bytes : remote_bytes;
    m.bank_accesses = bank_blocks;
    const double w_bytes = static_cast<double>(cfg.low_caps * cfg.high_caps *
                                               cfg.low_dim * cfg.high_dim * 4);
    const double u_bytes = static_cast<double>(cfg.batch_size * cfg.low_caps *
                                               cfg.low_dim * 4);
    const double v_bytes = static_cast<double>(cfg.batch_size * cfg.high_caps *
                                               cfg.high_dim * 4);
    m.external_bytes = w_bytes + u_bytes + v_bytes;
    m.energy_rel = energy_model(static_cast<double>(m.total_ops), m.bank_accesses,
                                m.intervault_bytes, m.external_bytes, opt.energy);
    for (std::size_t v = 0; v < V; ++v)
        m.per_vault_busy[v] =
            m.total_cycles ? vault_compute[v] / static_cast<double>(m.total_cycles) : 0.0;

    result.metrics = m;
    if (opt.with_numerics) {
        const auto inst = numeric_instance(cfg, opt.seed);
        caps::ApproxProvider prov{opt.exp_params};
        result.numerics = caps::dynamic_routing(inst.u, inst.W, cfg, prov);
    }
    return result;
}

std::string metrics_to_json(const SimMetrics& m) {
    nlohmann::json j;
    j["total_cycles"] = m.total_cycles;
    j["compute_cycles"] = m.compute_cycles;
    j["intervault_comm_cycles"] = m.intervault_comm_cycles;
    j["vrs_cycles"] = m.vrs_cycles;
    j["host_stall_cycles"] = m.host_stall_cycles;
    j["intervault_bytes"] = m.intervault_bytes;
    j["external_bytes"] = m.external_bytes;
    j["bank_accesses"] = m.bank_accesses;
    j["total_ops"] = m.total_ops;
    j["energy_rel"] = m.energy_rel;
    j["per_vault_busy"] = m.per_vault_busy;
    return j.dump(2);
}

} // namespace pimcaps::sim
