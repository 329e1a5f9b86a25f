#include "pimcaps/approx_arith.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace pimcaps::arith {

std::uint32_t float_bits(float x) { return std::bit_cast<std::uint32_t>(x); }
float bits_to_float(std::uint32_t b) { return std::bit_cast<float>(b); }

Binary32View Binary32View::decompose(float x) {
    const std::uint32_t b = float_bits(x);
    return Binary32View{b >> 31, (b >> 23) & 0xFFu, b & 0x7FFFFFu};
}

std::uint32_t Binary32View::bits() const {
    return (sign << 31) | (ep << 23) | fraction;
}

float Binary32View::reassemble() const { return bits_to_float(bits()); }

float approx_exp_raw(float x, const ExpApproxParams& params) {
    if (!(x >= kExpSafeLo && x <= kExpSafeHi))
        throw std::domain_error("approx_exp: input " + std::to_string(x) +
                                " outside safe range [" + std::to_string(kExpSafeLo) +
                                ", " + std::to_string(kExpSafeHi) + "]");
    const float z = params.log2e * x + (params.avg + 126.0f);
    // Truncation models the chunked low-bit loss of the shifter path.
    const auto pattern = static_cast<std::uint32_t>(
        static_cast<std::int64_t>(std::floor(static_cast<double>(z) * 8388608.0)));
    return bits_to_float(pattern);
}

float approx_exp(float x, const ExpApproxParams& params) {
    return approx_exp_raw(x, params) * params.recovery_factor;
}

float approx_inv_sqrt(float x) {
    if (!(x > 0.0f) || !std::isfinite(x))
        throw std::domain_error("approx_inv_sqrt: input must be a positive finite value");
    const std::uint32_t i = 0x5f3759dfu - (float_bits(x) >> 1);
    float y = bits_to_float(i);
    y = y * (1.5f - 0.5f * x * y * y);
    return y;
}

float approx_div(float a, float d) {
    if (!(d > 0.0f) || !std::isfinite(d))
        throw std::domain_error("approx_div: divisor must be a positive finite value");
    if (!std::isfinite(a))
        throw std::domain_error("approx_div: numerator must be finite");
    const std::uint32_t i = 0x7eef127fu - float_bits(d);
    float r = bits_to_float(i);
    r = r * (2.0f - d * r);
    return a * r;
}

namespace {

// splitmix64; gives identical streams on every platform.
std::uint64_t next_u64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace

ExpApproxParams calibrate_exp_recovery(std::size_t n_samples, float lo, float hi,
                                       std::uint64_t seed) {
    if (n_samples < 1000)
        throw std::invalid_argument("calibrate_exp_recovery: need at least 1000 samples");
    if (!(lo < hi))
        throw std::invalid_argument("calibrate_exp_recovery: empty or inverted range");

    ExpApproxParams p;
    std::uint64_t state = seed;
    double ratio_sum = 0.0;
    for (std::size_t n = 0; n < n_samples; ++n) {
        const double u = static_cast<double>(next_u64(state) >> 11) * 0x1.0p-53;
        const float x = static_cast<float>(lo + (hi - lo) * u);
        const double exact = std::exp(static_cast<double>(x));
        const double approx = approx_exp_raw(x, p);
        ratio_sum += exact / approx;
    }
    p.recovery_factor = static_cast<float>(ratio_sum / static_cast<double>(n_samples));
    return p;
}

std::string exp_params_to_json(const ExpApproxParams& p) {
    char buf[16];
    nlohmann::json j;
    std::snprintf(buf, sizeof buf, "0x%08x", float_bits(p.log2e));
    j["log2e"] = buf;
    std::snprintf(buf, sizeof buf, "0x%08x", float_bits(p.avg));
    j["avg"] = buf;
    std::snprintf(buf, sizeof buf, "0x%08x", float_bits(p.recovery_factor));
    j["recovery_factor"] = buf;
    return j.dump(2);
}

ExpApproxParams exp_params_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    auto field = [&](const char* name) {
        const std::string s = j.at(name).get<std::string>();
        return bits_to_float(static_cast<std::uint32_t>(std::stoul(s, nullptr, 16)));
    };
    ExpApproxParams p;
    p.log2e = field("log2e");
    p.avg = field("avg");
    p.recovery_factor = field("recovery_factor");
    if (!(p.avg > 0.94f && p.avg < 0.95f))
        throw std::invalid_argument("exp params: avg outside (0.94, 0.95)");
    if (!(p.recovery_factor > 0.0f))
        throw std::invalid_argument("exp params: recovery_factor must be positive");
    return p;
}

unsigned pe_flow_latency(PeFlow kind, const PEConfig& config) {
    switch (kind) {
        case PeFlow::MAC: return config.stages_mac * config.stage_latency;
        case PeFlow::EXP: return config.stages_exp * config.stage_latency;
        case PeFlow::INVSQRT: return config.stages_invsqrt * config.stage_latency;
        case PeFlow::DIV: return config.stages_div * config.stage_latency;
    }
    throw std::invalid_argument("pe_flow_latency: unknown flow kind");
}

} // namespace pimcaps::arith
