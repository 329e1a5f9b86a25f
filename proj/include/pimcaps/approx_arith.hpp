#ifndef PIMCAPS_APPROX_ARITH_HPP
#define PIMCAPS_APPROX_ARITH_HPP

#include <cstdint>
#include <string>

namespace pimcaps::arith {

/// Field view of an IEEE-754 binary32 pattern. Reassembly is exact for all
/// 2^32 patterns.
struct Binary32View {
    std::uint32_t sign;     // 1 bit
    std::uint32_t ep;       // 8-bit biased exponent
    std::uint32_t fraction; // 23-bit significand fraction

    static constexpr std::uint32_t kBias = 127;

    static Binary32View decompose(float x);
    float reassemble() const;
    std::uint32_t bits() const;
};

std::uint32_t float_bits(float x);
float bits_to_float(std::uint32_t b);

/// Constants of the exponential approximation. log2e and avg are fixed
/// offline; avg is the mean of (2^f - f) over f in [0,1), i.e. 1/ln2 - 1/2.
/// recovery_factor is 1.0 until calibrate_exp_recovery() runs.
struct ExpApproxParams {
    float log2e = 1.4426950408889634f;
    float avg = 0.9426950408889634f;
    float recovery_factor = 1.0f;
};

/// Safe input range of approx_exp: the widest interval on which the
/// constructed pattern keeps a positive, finite exponent field. Outside it
/// the construction under- or overflows. Routing logits routinely reach a
/// few tens, so the full validity interval is enforced rather than a
/// narrower operating band.
inline constexpr float kExpSafeLo = -87.0f;
inline constexpr float kExpSafeHi = 88.0f;

/// Exponential via bit construction: the real value
///   z = log2e*x + avg + bias - 1
/// is scaled by 2^23, truncated, and the integer is reinterpreted as a
/// binary32 pattern (integer part lands in the exponent field, fractional
/// part in the fraction field). The result is then scaled by the calibrated
/// recovery factor.
float approx_exp(float x, const ExpApproxParams& params);

/// approx_exp with recovery_factor forced to 1 (used by calibration).
float approx_exp_raw(float x, const ExpApproxParams& params);

/// Fast inverse square root: magic-constant shift plus one Newton step.
/// Relative error <= 0.2% over positive normals.
float approx_inv_sqrt(float x);

/// Division as reciprocal bit trick plus one Newton step, then a multiply.
/// Relative error <= 0.5% over positive normal divisors.
float approx_div(float a, float d);

/// Draws n_samples uniform x from [lo, hi], measures mean exact/approx ratio
/// of the raw exponential and stores it as the recovery factor.
/// Deterministic for a fixed seed (portable generator, no stdlib
/// distributions).
ExpApproxParams calibrate_exp_recovery(std::size_t n_samples, float lo, float hi,
                                       std::uint64_t seed);

inline constexpr std::size_t kDefaultCalibrationSamples = 10000;
inline constexpr float kDefaultCalibrationLo = -5.0f;
inline constexpr float kDefaultCalibrationHi = 5.0f;

/// Serialization of calibration results. Constants travel as hex bit
/// patterns so import/export is bit-exact.
std::string exp_params_to_json(const ExpApproxParams& p);
ExpApproxParams exp_params_from_json(const std::string& text);

enum class PeFlow { MAC, EXP, INVSQRT, DIV };

/// Datapath flows through the PE stages (adder/multiplier/shifter).
/// MAC is a 2-stage pass; EXP 4; INVSQRT 5; DIV 3.
struct PEConfig {
    unsigned stage_latency = 1; // cycles per datapath stage
    unsigned stages_mac = 2;
    unsigned stages_exp = 4;
    unsigned stages_invsqrt = 5;
    unsigned stages_div = 3;
};

unsigned pe_flow_latency(PeFlow kind, const PEConfig& config);

} // namespace pimcaps::arith

#endif
