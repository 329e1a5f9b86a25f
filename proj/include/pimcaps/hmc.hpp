#ifndef PIMCAPS_HMC_HPP
#define PIMCAPS_HMC_HPP

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace pimcaps::hmc {

/// Stacked-memory structure: 32 vaults x 16 banks, 16-byte access blocks.
struct HMCConfig {
    std::size_t n_vaults = 32;
    std::size_t banks_per_vault = 16;
    std::uint64_t capacity_bytes = 8ull << 30;
    double external_bw = 320e9;  // bytes/s, host link
    double internal_bw = 512e9;  // bytes/s, aggregate across vault ports
    std::size_t pes_per_vault = 16;
    double vault_freq = 312.5e6; // Hz
    std::size_t block_bytes = 16;
    unsigned bank_access_latency = 8;   // vault cycles per block burst (activate)
    unsigned block_stream_cycles = 1;   // additional cycles per extra block in a burst
    double crossbar_efficiency = 0.45;  // sustained fraction of the aggregate rate
                                        // under scattered many-to-many traffic

    /// One vault's share of the crossbar: transfers converging on a single
    /// vault serialize at this rate.
    double per_vault_bw() const {
        return internal_bw / static_cast<double>(n_vaults);
    }

    void validate() const;
};

enum class MapMode { Default, Proposed };

/// Block-address bit layout. The 3-bit indicator selects the sub-page size:
/// k = indicator value, sub-page = 2^k blocks (16B..256B).
struct AddressLayout {
    MapMode mode = MapMode::Default;
    unsigned subpage_log2_blocks = 0; // k, 0..4

    static constexpr unsigned kBlockAddrBits = 29; // 8 GB / 16 B
    static constexpr unsigned kVaultBits = 5;
    static constexpr unsigned kBankBits = 4;
};

struct MappedAddress {
    std::uint32_t vault;
    std::uint32_t bank;
    std::uint32_t subpage;
    std::uint32_t block_in_subpage;
};

/// Default interleaving: block address fields from low to high are
/// block-in-sub-page (k bits), vault (5), bank (4), sub-page id.
MappedAddress map_address_default(std::uint64_t addr, const AddressLayout& layout);

/// In-memory layout: vault id moves to the top so consecutive data stays in
/// one vault; bank sits below the sub-page id so consecutive sub-pages
/// rotate across banks. Fields low to high: block-in-sub-page (k bits),
/// bank (4), sub-page id (20-k), vault (5).
MappedAddress map_address_pim(std::uint64_t addr, unsigned indicator);

/// Inverse mappings; reconstruct the block-aligned byte address.
std::uint64_t unmap_address_default(const MappedAddress& m, const AddressLayout& layout);
std::uint64_t unmap_address_pim(const MappedAddress& m, unsigned indicator);

struct MemoryRequest {
    bool from_host = false;
    std::uint32_t pe_vault = 0; // requester identity when from a PE
    std::uint32_t pe_id = 0;
    std::uint64_t address = 0; // byte address, < 2^33
    std::uint32_t n_blocks = 1;
    unsigned indicator = 0; // 3-bit sub-page code, 0..4
    std::uint64_t issue_cycle = 0;

    // filled by mapping at enqueue time
    std::uint32_t vault = 0;
    std::uint32_t bank = 0;
};

struct CompletedRequest {
    MemoryRequest req;
    std::uint64_t start_cycle = 0;
    std::uint64_t complete_cycle = 0;
    std::uint64_t stalled_cycles = 0;
};

/// Per-vault request queue plus bank-busy bookkeeping.
struct VaultState {
    std::deque<MemoryRequest> queue;
    std::vector<std::uint64_t> bank_busy_until; // absolute cycle
    std::uint64_t vrs_count = 0;                // accumulated stall cycles
    bool host_priority = false;                 // granted by the scheduler

    std::size_t depth() const { return queue.size(); }
};

class VaultArray {
public:
    explicit VaultArray(const HMCConfig& cfg);

    const HMCConfig& config() const { return cfg_; }

    /// Routes the request to its vault using the mode/indicator carried on
    /// the request, appends it FIFO.
    void enqueue(MemoryRequest req, MapMode mode);

    /// Advances one vault cycle: per vault, issues queued requests whose
    /// target bank is idle (host-priority vaults serve host requests first),
    /// charges one stall cycle to every request left waiting on a busy bank.
    std::vector<CompletedRequest> service_cycle(std::uint64_t cycle);

    /// Runs service_cycle until all queues drain; returns all completions.
    std::vector<CompletedRequest> drain(std::uint64_t start_cycle);

    VaultState& vault(std::size_t v) { return vaults_.at(v); }
    const VaultState& vault(std::size_t v) const { return vaults_.at(v); }
    std::size_t size() const { return vaults_.size(); }

    std::uint64_t total_vrs() const;
    std::uint64_t total_requests() const { return total_requests_; }
    bool idle() const;

private:
    HMCConfig cfg_;
    std::vector<VaultState> vaults_;
    std::uint64_t total_requests_ = 0;
};

/// Cycles to move `bytes` across the crossbar at one vault port's share of
/// the internal bandwidth; transfers between the same endpoints serialize.
std::uint64_t crossbar_cost(double bytes, const HMCConfig& cfg);

/// Cycles at the full aggregate crossbar rate, for traffic spread across
/// many independent vault pairs.
std::uint64_t crossbar_cost_aggregate(double bytes, const HMCConfig& cfg);

/// CSV trace row per completed request.
std::string trace_header();
std::string trace_row(const CompletedRequest& c);

} // namespace pimcaps::hmc

#endif
