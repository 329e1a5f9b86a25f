#include "pimcaps/planner.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pimcaps::plan {

namespace {

double ceil_div(std::size_t a, std::size_t b) {
    return static_cast<double>((a + b - 1) / b);
}

double ceil_log2(std::size_t v) {
    double bits = 0;
    std::size_t cap = 1;
    while (cap < v) {
        cap *= 2;
        bits += 1;
    }
    return bits;
}

} // namespace

const char* dim_name(Dim d) {
    switch (d) {
        case Dim::B: return "B";
        case Dim::L: return "L";
        case Dim::H: return "H";
    }
    return "?";
}

std::vector<Dim> parallelizable_dims(Stage stage) {
    switch (stage) {
        case Stage::Predict: return {Dim::B, Dim::L, Dim::H};
        case Stage::WeightedSum: return {Dim::B, Dim::H};
        case Stage::Squash: return {Dim::B, Dim::H};
        case Stage::Agreement: return {Dim::L, Dim::H};
        case Stage::Softmax: return {Dim::L};
    }
    throw std::invalid_argument("parallelizable_dims: unknown stage");
}

void CostParams::validate() const {
    if (n_vault < 1) throw std::invalid_argument("CostParams: n_vault must be >= 1");
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("CostParams: alpha and beta must be positive");
    if (!(size_b > 0 && size_c > 0 && size_s > 0 && size_v > 0 && size_pkt > 0))
        throw std::invalid_argument("CostParams: sizes must be positive");
}

CostParams CostParams::defaults_for(double pes_per_vault, double vault_freq_hz,
                                    double internal_bw, std::size_t n_vault) {
    CostParams p;
    p.n_vault = n_vault;
    p.alpha = 1.0 / (pes_per_vault * vault_freq_hz);
    p.beta = 1.0 / (internal_bw / static_cast<double>(n_vault));
    return p;
}

double compute_E(Dim dim, const NetworkConfig& cfg, const CostParams& p) {
    cfg.validate();
    p.validate();
    const double NB = static_cast<double>(cfg.batch_size);
    const double NL = static_cast<double>(cfg.low_caps);
    const double NH = static_cast<double>(cfg.high_caps);
    const double CL = static_cast<double>(cfg.low_dim);
    const double CH = static_cast<double>(cfg.high_dim);
    const double I = static_cast<double>(cfg.iterations);
    const double V = static_cast<double>(p.n_vault);

    switch (dim) {
        case Dim::B: {
            const double cb = ceil_div(cfg.batch_size, p.n_vault);
            return cb * NL * NH * CH * (2.0 * CL - 1.0) +
                   I * (cb * NH * CH * (2.0 * NL - 1.0) +
                        cb * NH * (3.0 * CH + 19.0) +
                        cb * NL * NH * (2.0 * CH - 1.0) +
                        ceil_log2(p.n_vault) / V +
                        4.0 * CH);
        }
        case Dim::L: {
            const double cl = ceil_div(cfg.low_caps, p.n_vault);
            return NB * cl * NH * (2.0 * I * (2.0 * CH - 1.0) + CH * (2.0 * CL - 1.0));
        }
        case Dim::H: {
            const double ch = ceil_div(cfg.high_caps, p.n_vault);
            return NB * NL * ch * CH * (2.0 * CL - 1.0 + 2.0 * I);
        }
    }
    throw std::invalid_argument("compute_E: unknown dimension");
}

double compute_E_B_simplified(const NetworkConfig& cfg, const CostParams& p) {
    cfg.validate();
    const double NL = static_cast<double>(cfg.low_caps);
    const double NH = static_cast<double>(cfg.high_caps);
    const double CL = static_cast<double>(cfg.low_dim);
    const double CH = static_cast<double>(cfg.high_dim);
    const double I = static_cast<double>(cfg.iterations);
    const double cb = ceil_div(cfg.batch_size, p.n_vault);
    return cb * NL * NH * ((4.0 * I - 1.0) * CH + 2.0 * CL * CH - I);
}

double compute_M(Dim dim, const NetworkConfig& cfg, const CostParams& p) {
    cfg.validate();
    p.validate();
    if (p.n_vault == 1) return 0.0; // no peers, no movement
    const double NB = static_cast<double>(cfg.batch_size);
    const double NL = static_cast<double>(cfg.low_caps);
    const double NH = static_cast<double>(cfg.high_caps);
    const double CH = static_cast<double>(cfg.high_dim);
    const double I = static_cast<double>(cfg.iterations);
    const double Vm1 = static_cast<double>(p.n_vault - 1);

    switch (dim) {
        case Dim::B:
            // gather pre-aggregated b, scatter c
            return I * (Vm1 * NL * NH * (p.size_b + p.size_pkt) +
                        Vm1 * NL * NH * (p.size_c + p.size_pkt));
        case Dim::L:
            // all-reduce s vectors, broadcast v vectors
            return I * (NB * Vm1 * NH * (p.size_s * CH + p.size_pkt) +
                        NB * Vm1 * NH * (p.size_v * CH + p.size_pkt));
        case Dim::H:
            // all-reduce softmax partials, return per-row normalizers
            return I * (Vm1 * NL * (p.size_b + p.size_pkt) +
                        NL * (p.size_c + p.size_pkt));
    }
    throw std::invalid_argument("compute_M: unknown dimension");
}

double execution_score(double E, double M, const CostParams& p) {
    if (E < 0 || M < 0)
        throw std::invalid_argument("execution_score: negative cost");
    const double denom = p.alpha * E + p.beta * M;
    if (denom == 0.0)
        throw std::invalid_argument("execution_score: alpha*E + beta*M is zero");
    return 1.0 / denom;
}

const DimCost& CostReport::cost(Dim d) const {
    for (const auto& c : per_dim)
        if (c.dim == d) return c;
    throw std::logic_error("CostReport: missing dimension");
}

CostReport select_dimension(const NetworkConfig& cfg, const CostParams& p) {
    CostReport r{};
    const Dim order[3] = {Dim::B, Dim::L, Dim::H};
    for (int n = 0; n < 3; ++n) {
        const Dim d = order[n];
        const double E = compute_E(d, cfg, p);
        const double M = compute_M(d, cfg, p);
        r.per_dim[n] = DimCost{d, E, M, execution_score(E, M, p)};
    }
    // argmax S; the B > L > H order makes ties deterministic
    r.selected = Dim::B;
    double best = r.per_dim[0].S;
    for (int n = 1; n < 3; ++n) {
        if (r.per_dim[n].S > best) {
            best = r.per_dim[n].S;
            r.selected = r.per_dim[n].dim;
        }
    }
    return r;
}

std::vector<std::pair<double, CostReport>> frequency_sweep(
    const NetworkConfig& cfg, const CostParams& p, const std::vector<double>& freqs_hz) {
    if (freqs_hz.empty())
        throw std::invalid_argument("frequency_sweep: empty frequency list");
    std::vector<std::pair<double, CostReport>> out;
    out.reserve(freqs_hz.size());
    for (double f : freqs_hz) {
        if (!(f > 0.0))
            throw std::invalid_argument("frequency_sweep: non-positive frequency");
        CostParams scaled = p;
        scaled.alpha = p.alpha * (kDefaultVaultFreq / f);
        out.emplace_back(f, select_dimension(cfg, scaled));
    }
    return out;
}

std::string cost_report_csv(const CostReport& report) {
    std::ostringstream os;
    os << "dim,E,M,S,selected\n";
    os.precision(17);
    for (const auto& c : report.per_dim) {
        os << dim_name(c.dim) << ',' << c.E << ',' << c.M << ',' << c.S << ','
           << (c.dim == report.selected ? 1 : 0) << '\n';
    }
    return os.str();
}

} // namespace pimcaps::plan
