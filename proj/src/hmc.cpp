#include "pimcaps/hmc.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pimcaps::hmc {

void HMCConfig::validate() const {
    if (n_vaults < 1 || banks_per_vault < 1)
        throw std::invalid_argument("HMCConfig: vault/bank counts must be >= 1");
    if (block_bytes != 16)
        throw std::invalid_argument("HMCConfig: block size is fixed at 16 bytes");
    if (!(vault_freq > 0) || !(internal_bw > 0) || !(external_bw > 0))
        throw std::invalid_argument("HMCConfig: rates must be positive");
}

namespace {

constexpr std::uint64_t kMaxAddr = 1ull << 34; // top bit of 34 ignored
constexpr std::uint32_t kBlockMask = (1u << AddressLayout::kBlockAddrBits) - 1;

std::uint32_t block_address(std::uint64_t addr) {
    return static_cast<std::uint32_t>((addr >> 4)) & kBlockMask;
}

void check_addr(std::uint64_t addr) {
    if (addr >= kMaxAddr)
        throw std::out_of_range("address out of range");
}

void check_indicator(unsigned indicator) {
    if (indicator > 4)
        throw std::invalid_argument("indicator must be in 000..100 (sub-pages 16B..256B)");
}

} // namespace

MappedAddress map_address_default(std::uint64_t addr, const AddressLayout& layout) {
    check_addr(addr);
    if (layout.mode != MapMode::Default)
        throw std::invalid_argument("map_address_default: layout mode is not Default");
    check_indicator(layout.subpage_log2_blocks);
    const unsigned k = layout.subpage_log2_blocks;
    const std::uint32_t b = block_address(addr);
    MappedAddress m{};
    m.block_in_subpage = b & ((1u << k) - 1);
    m.vault = (b >> k) & 0x1Fu;
    m.bank = (b >> (k + 5)) & 0xFu;
    m.subpage = b >> (k + 9);
    return m;
}

MappedAddress map_address_pim(std::uint64_t addr, unsigned indicator) {
    check_addr(addr);
    check_indicator(indicator);
    const unsigned k = indicator;
    const std::uint32_t b = block_address(addr);
    MappedAddress m{};
    m.block_in_subpage = b & ((1u << k) - 1);
    m.bank = (b >> k) & 0xFu;
    m.subpage = (b >> (k + 4)) & ((1u << (20 - k)) - 1);
    m.vault = b >> 24;
    return m;
}

std::uint64_t unmap_address_default(const MappedAddress& m, const AddressLayout& layout) {
    const unsigned k = layout.subpage_log2_blocks;
    const std::uint32_t b = m.block_in_subpage | (m.vault << k) | (m.bank << (k + 5)) |
                            (m.subpage << (k + 9));
    return static_cast<std::uint64_t>(b) << 4;
}

std::uint64_t unmap_address_pim(const MappedAddress& m, unsigned indicator) {
    const unsigned k = indicator;
    const std::uint32_t b = m.block_in_subpage | (m.bank << k) | (m.subpage << (k + 4)) |
                            (m.vault << 24);
    return static_cast<std::uint64_t>(b) << 4;
}

VaultArray::VaultArray(const HMCConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    vaults_.resize(cfg_.n_vaults);
    for (auto& v : vaults_)
        v.bank_busy_until.assign(cfg_.banks_per_vault, 0);
}

void VaultArray::enqueue(MemoryRequest req, MapMode mode) {
    // a PE burst must fit its sub-page so it cannot span banks
    if (!req.from_host &&
        static_cast<std::uint64_t>(req.n_blocks) * cfg_.block_bytes >
            (cfg_.block_bytes << req.indicator))
        throw std::invalid_argument("enqueue: PE request larger than its sub-page");
    const MappedAddress m = (mode == MapMode::Default)
                                ? map_address_default(req.address,
                                                      AddressLayout{MapMode::Default, req.indicator})
                                : map_address_pim(req.address, req.indicator);
    req.vault = m.vault;
    req.bank = m.bank;
    if (req.vault >= vaults_.size())
        throw std::out_of_range("enqueue: request maps outside the vault array");
    vaults_[req.vault].queue.push_back(req);
    ++total_requests_;
}

std::vector<CompletedRequest> VaultArray::service_cycle(std::uint64_t cycle) {
    std::vector<CompletedRequest> done;
    for (auto& vault : vaults_) {
        if (vault.queue.empty()) continue;

        // mode 0: host requests only, 1: PE only, 2: arrival order.
        auto sweep = [&](int mode) {
            for (auto it = vault.queue.begin(); it != vault.queue.end();) {
                if ((mode == 0 && !it->from_host) || (mode == 1 && it->from_host)) {
                    ++it;
                    continue;
                }
                auto& busy = vault.bank_busy_until[it->bank];
                if (busy <= cycle) {
                    const std::uint64_t latency =
                        cfg_.bank_access_latency +
                        static_cast<std::uint64_t>(cfg_.block_stream_cycles) *
                            (it->n_blocks - 1);
                    CompletedRequest c;
                    c.req = *it;
                    c.start_cycle = cycle;
                    c.complete_cycle = cycle + latency;
                    c.stalled_cycles = cycle - it->issue_cycle;
                    busy = cycle + latency;
                    done.push_back(c);
                    it = vault.queue.erase(it);
                } else {
                    vault.vrs_count += 1; // waiting on a busy bank
                    ++it;
                }
            }
        };
        if (vault.host_priority) {
            sweep(0);
            sweep(1);
        } else {
            sweep(2);
        }
    }
    return done;
}

std::vector<CompletedRequest> VaultArray::drain(std::uint64_t start_cycle) {
    std::vector<CompletedRequest> all;
    std::uint64_t cycle = start_cycle;
    while (!idle()) {
        auto done = service_cycle(cycle);
        all.insert(all.end(), done.begin(), done.end());
        ++cycle;
    }
    return all;
}

bool VaultArray::idle() const {
    for (const auto& v : vaults_)
        if (!v.queue.empty()) return false;
    return true;
}

std::uint64_t VaultArray::total_vrs() const {
    std::uint64_t n = 0;
    for (const auto& v : vaults_) n += v.vrs_count;
    return n;
}

namespace {

std::uint64_t cost_at(double bytes, double bw, double freq) {
    if (bytes < 0) throw std::invalid_argument("crossbar_cost: negative byte count");
    if (bytes == 0) return 0;
    const double per_cycle = bw / freq;
    return static_cast<std::uint64_t>(std::ceil(bytes / per_cycle));
}

} // namespace

std::uint64_t crossbar_cost(double bytes, const HMCConfig& cfg) {
    return cost_at(bytes, cfg.per_vault_bw(), cfg.vault_freq);
}

std::uint64_t crossbar_cost_aggregate(double bytes, const HMCConfig& cfg) {
    return cost_at(bytes, cfg.internal_bw * cfg.crossbar_efficiency, cfg.vault_freq);
}

std::string trace_header() {
    return "cycle_issued,cycle_completed,requester,vault,bank,stalled_cycles\n";
}

std::string trace_row(const CompletedRequest& c) {
    std::ostringstream os;
    os << c.req.issue_cycle << ',' << c.complete_cycle << ','
       << (c.req.from_host ? "host" : ("pe" + std::to_string(c.req.pe_id))) << ','
       << c.req.vault << ',' << c.req.bank << ',' << c.stalled_cycles << '\n';
    return os.str();
}

} // namespace pimcaps::hmc
