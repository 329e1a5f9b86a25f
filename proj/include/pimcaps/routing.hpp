#ifndef PIMCAPS_ROUTING_HPP
#define PIMCAPS_ROUTING_HPP

#include <cmath>
#include <concepts>
#include <cstdint>

#include "pimcaps/approx_arith.hpp"
#include "pimcaps/tensor.hpp"

namespace pimcaps::caps {

/// Capsule-network shape parameters.
struct NetworkConfig {
    std::size_t batch_size = 1;  // N_B
    std::size_t low_caps = 1;    // N_L
    std::size_t high_caps = 1;   // N_H
    std::size_t low_dim = 8;     // C_L, scalars per L capsule
    std::size_t high_dim = 16;   // C_H, scalars per H capsule
    std::size_t iterations = 3;  // I

    void validate() const;
};

/// All routing tensors after an execution, kept for inspection.
///   u_hat [k,i,j,C_H], b [i,j], c [i,j], s [k,j,C_H], v [k,j,C_H].
/// b is shared across the batch axis: the agreement step sums over k into a
/// single b[i,j].
struct RoutingState {
    Tensor u_hat;
    Tensor b;
    Tensor c;
    Tensor s;
    Tensor v;
};

/// Scalar arithmetic used by every routing operation. Providers are pure
/// value functions; the approximate one carries only its fixed calibration
/// constants.
template <class P>
concept ScalarProvider = requires(const P p, float a, float b) {
    { p.add(a, b) } -> std::convertible_to<float>;
    { p.mul(a, b) } -> std::convertible_to<float>;
    { p.div(a, b) } -> std::convertible_to<float>;
    { p.inv_sqrt(a) } -> std::convertible_to<float>;
    { p.exp(a) } -> std::convertible_to<float>;
    { P::softmax_subtracts_max } -> std::convertible_to<bool>;
};

/// Host-native binary32 arithmetic.
struct ExactProvider {
    static constexpr bool softmax_subtracts_max = true;
    float add(float a, float b) const { return a + b; }
    float mul(float a, float b) const { return a * b; }
    float div(float a, float b) const { return a / b; }
    float inv_sqrt(float x) const { return 1.0f / std::sqrt(x); }
    float exp(float x) const { return std::exp(x); }
};

/// PE-datapath arithmetic: native adds/multiplies, bit-manipulated
/// exp / inverse-sqrt / division. The PE has no max unit, so its softmax
/// exponentiates directly and relies on the documented safe input range.
struct ApproxProvider {
    static constexpr bool softmax_subtracts_max = false;
    arith::ExpApproxParams exp_params;

    float add(float a, float b) const { return a + b; }
    float mul(float a, float b) const { return a * b; }
    float div(float a, float b) const { return arith::approx_div(a, b); }
    float inv_sqrt(float x) const { return arith::approx_inv_sqrt(x); }
    float exp(float x) const { return arith::approx_exp(x, exp_params); }
};

static_assert(ScalarProvider<ExactProvider>);
static_assert(ScalarProvider<ApproxProvider>);

/// u [k,i,C_L] x W [i,j,C_L,C_H] -> u_hat [k,i,j,C_H].
template <ScalarProvider P>
Tensor predict(const Tensor& u, const Tensor& W, const P& p) {
    require_rank(u, 3, "predict: u");
    require_rank(W, 4, "predict: W");
    require_axis_match(u, 1, W, 0, "i (low capsule)");
    require_axis_match(u, 2, W, 2, "C_L (low-capsule dim)");
    require_finite(u, "predict: u");
    require_finite(W, "predict: W");

    const std::size_t NB = u.extent(0), NL = u.extent(1), CL = u.extent(2);
    const std::size_t NH = W.extent(1), CH = W.extent(3);
    Tensor out({NB, NL, NH, CH});
    const float* ud = u.data();
    const float* wd = W.data();
    float* od = out.data();
    for (std::size_t k = 0; k < NB; ++k)
        for (std::size_t i = 0; i < NL; ++i) {
            const float* urow = ud + (k * NL + i) * CL;
            for (std::size_t j = 0; j < NH; ++j) {
                const float* wmat = wd + ((i * NH + j) * CL) * CH;
                float* orow = od + (((k * NL + i) * NH) + j) * CH;
                for (std::size_t h = 0; h < CH; ++h) {
                    float acc = p.mul(urow[0], wmat[h]);
                    for (std::size_t l = 1; l < CL; ++l)
                        acc = p.add(acc, p.mul(urow[l], wmat[l * CH + h]));
                    orow[h] = acc;
                }
            }
        }
    return out;
}

/// Softmax over the H-capsule axis for each fixed L capsule:
/// c[i,j] = exp(b[i,j]) / sum_j' exp(b[i,j']).
template <ScalarProvider P>
Tensor routing_softmax(const Tensor& b, const P& p) {
    require_rank(b, 2, "routing_softmax: b");
    require_finite(b, "routing_softmax: b");
    const std::size_t NL = b.extent(0), NH = b.extent(1);
    Tensor c({NL, NH});
    for (std::size_t i = 0; i < NL; ++i) {
        float shift = 0.0f;
        if constexpr (P::softmax_subtracts_max) {
            shift = b.at2(i, 0);
            for (std::size_t j = 1; j < NH; ++j)
                shift = std::max(shift, b.at2(i, j));
        }
        float denom = 0.0f;
        for (std::size_t j = 0; j < NH; ++j) {
            const float e = p.exp(b.at2(i, j) - shift);
            c.at2(i, j) = e;
            denom = (j == 0) ? e : p.add(denom, e);
        }
        for (std::size_t j = 0; j < NH; ++j)
            c.at2(i, j) = p.div(c.at2(i, j), denom);
    }
    return c;
}

/// s[k,j,.] = sum_i u_hat[k,i,j,.] * c[i,j].
template <ScalarProvider P>
Tensor weighted_sum(const Tensor& u_hat, const Tensor& c, const P& p) {
    require_rank(u_hat, 4, "weighted_sum: u_hat");
    require_rank(c, 2, "weighted_sum: c");
    require_axis_match(u_hat, 1, c, 0, "i (low capsule)");
    require_axis_match(u_hat, 2, c, 1, "j (high capsule)");
    const std::size_t NB = u_hat.extent(0), NL = u_hat.extent(1);
    const std::size_t NH = u_hat.extent(2), CH = u_hat.extent(3);
    Tensor s({NB, NH, CH});
    const float* uh = u_hat.data();
    float* sd = s.data();
    for (std::size_t k = 0; k < NB; ++k)
        for (std::size_t j = 0; j < NH; ++j) {
            float* srow = sd + (k * NH + j) * CH;
            for (std::size_t h = 0; h < CH; ++h) srow[h] = 0.0f;
            for (std::size_t i = 0; i < NL; ++i) {
                const float cij = c.at2(i, j);
                const float* urow = uh + (((k * NL + i) * NH) + j) * CH;
                if (i == 0) {
                    for (std::size_t h = 0; h < CH; ++h)
                        srow[h] = p.mul(urow[h], cij);
                } else {
                    for (std::size_t h = 0; h < CH; ++h)
                        srow[h] = p.add(srow[h], p.mul(urow[h], cij));
                }
            }
        }
    return s;
}

/// v = (|s|^2 / (1+|s|^2)) * (s / |s|), with squash(0) := 0.
/// Evaluated as s * (|s|^2 * invsqrt(|s|^2)) / (1+|s|^2) so the approximate
/// provider exercises its inverse-sqrt path.
template <ScalarProvider P>
Tensor squash(const Tensor& s, const P& p) {
    require_rank(s, 3, "squash: s");
    require_finite(s, "squash: s");
    const std::size_t NB = s.extent(0), NH = s.extent(1), CH = s.extent(2);
    Tensor v({NB, NH, CH});
    const float* sd = s.data();
    float* vd = v.data();
    for (std::size_t k = 0; k < NB; ++k)
        for (std::size_t j = 0; j < NH; ++j) {
            const float* srow = sd + (k * NH + j) * CH;
            float* vrow = vd + (k * NH + j) * CH;
            float n2 = p.mul(srow[0], srow[0]);
            for (std::size_t h = 1; h < CH; ++h)
                n2 = p.add(n2, p.mul(srow[h], srow[h]));
            if (n2 == 0.0f) {
                for (std::size_t h = 0; h < CH; ++h) vrow[h] = 0.0f;
                continue;
            }
            const float norm = p.mul(n2, p.inv_sqrt(n2));
            const float factor = p.div(norm, p.add(1.0f, n2));
            for (std::size_t h = 0; h < CH; ++h)
                vrow[h] = p.mul(srow[h], factor);
        }
    return v;
}

/// b'[i,j] = sum_k v[k,j,.] . u_hat[k,i,j,.] + b[i,j].
template <ScalarProvider P>
Tensor agreement_update(const Tensor& v, const Tensor& u_hat, const Tensor& b,
                        const P& p) {
    require_rank(v, 3, "agreement_update: v");
    require_rank(u_hat, 4, "agreement_update: u_hat");
    require_rank(b, 2, "agreement_update: b");
    require_axis_match(u_hat, 0, v, 0, "k (batch)");
    require_axis_match(u_hat, 2, v, 1, "j (high capsule)");
    require_axis_match(u_hat, 3, v, 2, "C_H (high-capsule dim)");
    require_axis_match(u_hat, 1, b, 0, "i (low capsule)");
    require_axis_match(u_hat, 2, b, 1, "j (high capsule)");
    const std::size_t NB = u_hat.extent(0), NL = u_hat.extent(1);
    const std::size_t NH = u_hat.extent(2), CH = u_hat.extent(3);
    Tensor out({NL, NH});
    const float* uh = u_hat.data();
    const float* vd = v.data();
    for (std::size_t i = 0; i < NL; ++i)
        for (std::size_t j = 0; j < NH; ++j) {
            float acc = b.at2(i, j);
            for (std::size_t k = 0; k < NB; ++k) {
                const float* urow = uh + (((k * NL + i) * NH) + j) * CH;
                const float* vrow = vd + (k * NH + j) * CH;
                float dot = p.mul(vrow[0], urow[0]);
                for (std::size_t h = 1; h < CH; ++h)
                    dot = p.add(dot, p.mul(vrow[h], urow[h]));
                acc = p.add(acc, dot);
            }
            out.at2(i, j) = acc;
        }
    return out;
}

struct RoutingResult {
    Tensor v;
    RoutingState trace;
};

/// Runs the full routing procedure: predict once, b <- 0, then `iterations`
/// rounds of softmax, weighted sum, squash and agreement update.
template <ScalarProvider P>
RoutingResult dynamic_routing(const Tensor& u, const Tensor& W,
                              const NetworkConfig& cfg, const P& p) {
    cfg.validate();
    if (u.rank() != 3 || u.extent(0) != cfg.batch_size ||
        u.extent(1) != cfg.low_caps || u.extent(2) != cfg.low_dim)
        throw ShapeError("dynamic_routing: u shape inconsistent with config");
    if (W.rank() != 4 || W.extent(0) != cfg.low_caps ||
        W.extent(1) != cfg.high_caps || W.extent(2) != cfg.low_dim ||
        W.extent(3) != cfg.high_dim)
        throw ShapeError("dynamic_routing: W shape inconsistent with config");

    RoutingState st;
    st.u_hat = predict(u, W, p);
    st.b = Tensor({cfg.low_caps, cfg.high_caps});
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        st.c = routing_softmax(st.b, p);
        st.s = weighted_sum(st.u_hat, st.c, p);
        st.v = squash(st.s, p);
        st.b = agreement_update(st.v, st.u_hat, st.b, p);
    }
    return RoutingResult{st.v, std::move(st)};
}

/// Deterministic seeded test-instance tensors: u ~ N(0,1),
/// W ~ N(0, 1/sqrt(C_L)). Portable generator, identical on every platform.
Tensor make_input_u(const NetworkConfig& cfg, std::uint64_t seed);
Tensor make_weights(const NetworkConfig& cfg, std::uint64_t seed);

/// Gaussian draws squashed per capsule into activity vectors (norm < 1),
/// the form routing inputs always take.
Tensor make_activity_input(const NetworkConfig& cfg, std::uint64_t seed);

struct RoutingInstance {
    Tensor u;
    Tensor W;
};

/// Instance with class structure: every batch element carries one target
/// capsule whose predictions align across the low capsules, which is what
/// trained weights produce and what makes an argmax comparison meaningful.
/// Raw draws are Gaussian; each input capsule is squashed to an activity
/// vector of norm < 1.
RoutingInstance make_labeled_instance(const NetworkConfig& cfg, std::uint64_t seed,
                                      double signal_gain = 1.0,
                                      double noise_sigma = 0.4);

} // namespace pimcaps::caps

#endif
