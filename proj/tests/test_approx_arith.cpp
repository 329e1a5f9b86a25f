#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pimcaps/approx_arith.hpp"
#include "pimcaps/rng.hpp"

using namespace pimcaps;
using namespace pimcaps::arith;

TEST_CASE("binary32 view round-trips every field combination") {
    // all sign/exponent combinations, randomized fractions: > 1e6 patterns
    Rng rng(11);
    std::size_t checked = 0;
    for (std::uint32_t sign = 0; sign <= 1; ++sign)
        for (std::uint32_t ep = 0; ep <= 255; ++ep)
            for (int n = 0; n < 2200; ++n) {
                const std::uint32_t frac =
                    static_cast<std::uint32_t>(rng.next_u64()) & 0x7FFFFFu;
                const std::uint32_t bits = (sign << 31) | (ep << 23) | frac;
                const auto view = Binary32View::decompose(bits_to_float(bits));
                CHECK(view.sign == sign);
                CHECK(view.ep == ep);
                CHECK(view.fraction == frac);
                REQUIRE(view.bits() == bits);
                ++checked;
            }
    CHECK(checked >= 1000000);
}

TEST_CASE("approx_exp hits the documented point accuracies") {
    ExpApproxParams raw;
    CHECK(std::fabs(approx_exp_raw(0.0f, raw) - 1.0) / 1.0 < 0.07);
    const double e1 = std::exp(1.0);
    CHECK(std::fabs(approx_exp_raw(1.0f, raw) - e1) / e1 < 0.07);
    const double prod = static_cast<double>(approx_exp_raw(-1.0f, raw)) *
                        static_cast<double>(approx_exp_raw(1.0f, raw));
    CHECK(std::fabs(prod - 1.0) < 0.15);
}

TEST_CASE("approx_exp rejects inputs outside the safe range") {
    ExpApproxParams p;
    CHECK_THROWS_WITH_AS(approx_exp(100.0f, p), doctest::Contains("safe range"),
                         std::domain_error);
    CHECK_THROWS_AS(approx_exp(-100.0f, p), std::domain_error);
    CHECK_THROWS_AS(approx_exp(std::nanf(""), p), std::domain_error);
    CHECK_NOTHROW(approx_exp(kExpSafeLo, p));
    CHECK_NOTHROW(approx_exp(kExpSafeHi, p));
}

TEST_CASE("approx_exp is positive and non-decreasing on an ascending grid") {
    ExpApproxParams p;
    float prev = 0.0f;
    for (int n = 0; n < 10000; ++n) {
        const float x = -10.0f + 20.0f * static_cast<float>(n) / 9999.0f;
        const float y = approx_exp(x, p);
        CHECK(y > 0.0f);
        CHECK(y >= prev);
        prev = y;
    }
}

TEST_CASE("raw error stays under 5% mean, calibration brings signed error under 1%") {
    ExpApproxParams raw;
    Rng rng(7);
    double mean_abs = 0.0;
    const int n_samples = 10000;
    for (int n = 0; n < n_samples; ++n) {
        const float x = static_cast<float>(rng.uniform(-5.0, 5.0));
        const double exact = std::exp(static_cast<double>(x));
        mean_abs += std::fabs(approx_exp_raw(x, raw) - exact) / exact;
    }
    CHECK(mean_abs / n_samples <= 0.05);

    const auto cal = calibrate_exp_recovery(10000, -5.0f, 5.0f, 42);
    CHECK(cal.recovery_factor > 0.0f);
    Rng fresh(1234); // separate draw from the calibration set
    double mean_signed = 0.0;
    for (int n = 0; n < n_samples; ++n) {
        const float x = static_cast<float>(fresh.uniform(-5.0, 5.0));
        const double exact = std::exp(static_cast<double>(x));
        mean_signed += (approx_exp(x, cal) - exact) / exact;
    }
    CHECK(std::fabs(mean_signed / n_samples) <= 0.01);
}

TEST_CASE("calibration is deterministic and validates its inputs") {
    const auto a = calibrate_exp_recovery(10000, -5.0f, 5.0f, 99);
    const auto b = calibrate_exp_recovery(10000, -5.0f, 5.0f, 99);
    CHECK(float_bits(a.recovery_factor) == float_bits(b.recovery_factor));
    CHECK_THROWS_AS(calibrate_exp_recovery(100, -5.0f, 5.0f, 1), std::invalid_argument);
    CHECK_THROWS_AS(calibrate_exp_recovery(10000, 5.0f, -5.0f, 1), std::invalid_argument);
}

TEST_CASE("inverse square root reference points and error bound") {
    CHECK(std::fabs(approx_inv_sqrt(1.0f) - 1.0) < 0.002);
    CHECK(std::fabs(approx_inv_sqrt(4.0f) - 0.5) / 0.5 < 0.002);
    CHECK(std::fabs(approx_inv_sqrt(0.25f) - 2.0) / 2.0 < 0.002);
    CHECK_THROWS_AS(approx_inv_sqrt(0.0f), std::domain_error);
    CHECK_THROWS_AS(approx_inv_sqrt(-1.0f), std::domain_error);
    CHECK_THROWS_AS(approx_inv_sqrt(std::numeric_limits<float>::infinity()),
                    std::domain_error);

    Rng rng(5);
    double worst = 0.0;
    for (int n = 0; n < 1000000; ++n) {
        const float x = static_cast<float>(
            std::exp(rng.uniform(std::log(1e-30), std::log(1e30))));
        const double exact = 1.0 / std::sqrt(static_cast<double>(x));
        worst = std::max(worst, std::fabs(approx_inv_sqrt(x) - exact) / exact);
    }
    CHECK(worst <= 0.002);
}

TEST_CASE("division reference points and error bound") {
    CHECK(std::fabs(approx_div(3.7f, 1.0f) - 3.7) / 3.7 < 0.005);
    CHECK(std::fabs(approx_div(1.0f, 2.0f) - 0.5) / 0.5 < 0.005);
    CHECK(approx_div(0.0f, 123.0f) == 0.0f);
    CHECK_THROWS_AS(approx_div(1.0f, 0.0f), std::domain_error);
    CHECK_THROWS_AS(approx_div(1.0f, -2.0f), std::domain_error);

    Rng rng(6);
    double worst = 0.0;
    for (int n = 0; n < 1000000; ++n) {
        const float a = static_cast<float>(rng.uniform(-100.0, 100.0));
        const float d = static_cast<float>(
            std::exp(rng.uniform(std::log(1e-30), std::log(1e30))));
        const double exact = static_cast<double>(a) / static_cast<double>(d);
        if (exact == 0.0) continue;
        worst = std::max(worst, std::fabs(approx_div(a, d) - exact) / std::fabs(exact));
    }
    CHECK(worst <= 0.005);
}

TEST_CASE("PE flow latencies follow the datapath stage counts") {
    PEConfig pe;
    CHECK(pe_flow_latency(PeFlow::MAC, pe) == 2);
    CHECK(pe_flow_latency(PeFlow::EXP, pe) == 4);
    CHECK(pe_flow_latency(PeFlow::INVSQRT, pe) == 5);
    CHECK(pe_flow_latency(PeFlow::DIV, pe) == 3);
    pe.stage_latency = 3;
    CHECK(pe_flow_latency(PeFlow::MAC, pe) == 6);
    CHECK(pe_flow_latency(PeFlow::INVSQRT, pe) == 15);
}

TEST_CASE("calibration constants survive a JSON round trip bit-exactly") {
    const auto cal = calibrate_exp_recovery(10000, -5.0f, 5.0f, 2024);
    const auto back = exp_params_from_json(exp_params_to_json(cal));
    CHECK(float_bits(back.log2e) == float_bits(cal.log2e));
    CHECK(float_bits(back.avg) == float_bits(cal.avg));
    CHECK(float_bits(back.recovery_factor) == float_bits(cal.recovery_factor));
    CHECK(back.avg > 0.94f);
    CHECK(back.avg < 0.95f);
}
