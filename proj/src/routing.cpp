#include "pimcaps/routing.hpp"

#include "pimcaps/rng.hpp"

namespace pimcaps::caps {

void NetworkConfig::validate() const {
    auto check = [](std::size_t v, const char* name) {
        if (v < 1)
            throw std::invalid_argument(std::string("NetworkConfig: ") + name +
                                        " must be >= 1");
    };
    check(batch_size, "batch_size");
    check(low_caps, "low_caps");
    check(high_caps, "high_caps");
    check(low_dim, "low_dim");
    check(high_dim, "high_dim");
    check(iterations, "iterations");
}

Tensor make_input_u(const NetworkConfig& cfg, std::uint64_t seed) {
    Tensor u({cfg.batch_size, cfg.low_caps, cfg.low_dim});
    Rng rng(seed);
    for (std::size_t n = 0; n < u.size(); ++n)
        u[n] = static_cast<float>(rng.normal());
    return u;
}

Tensor make_weights(const NetworkConfig& cfg, std::uint64_t seed) {
    Tensor W({cfg.low_caps, cfg.high_caps, cfg.low_dim, cfg.high_dim});
    Rng rng(seed ^ 0x57E16B75ULL);
    const double sigma = 1.0 / std::sqrt(static_cast<double>(cfg.low_dim));
    for (std::size_t n = 0; n < W.size(); ++n)
        W[n] = static_cast<float>(sigma * rng.normal());
    return W;
}

Tensor make_activity_input(const NetworkConfig& cfg, std::uint64_t seed) {
    Tensor u = make_input_u(cfg, seed);
    for (std::size_t k = 0; k < cfg.batch_size; ++k)
        for (std::size_t i = 0; i < cfg.low_caps; ++i) {
            double n2 = 0.0;
            for (std::size_t l = 0; l < cfg.low_dim; ++l) {
                const double x = u.at3(k, i, l);
                n2 += x * x;
            }
            const double f = n2 > 0 ? n2 / ((1.0 + n2) * std::sqrt(n2)) : 0.0;
            for (std::size_t l = 0; l < cfg.low_dim; ++l)
                u.at3(k, i, l) = static_cast<float>(u.at3(k, i, l) * f);
        }
    return u;
}

RoutingInstance make_labeled_instance(const NetworkConfig& cfg, std::uint64_t seed,
                                      double signal_gain, double noise_sigma) {
    RoutingInstance inst;
    inst.W = make_weights(cfg, seed);
    inst.u = Tensor({cfg.batch_size, cfg.low_caps, cfg.low_dim});
    Rng rng(seed * 7919 + 13);
    const std::size_t CL = cfg.low_dim, CH = cfg.high_dim;
    std::vector<double> dir(CH), base(CL);
    for (std::size_t k = 0; k < cfg.batch_size; ++k) {
        const std::size_t target = k % cfg.high_caps;
        double dn = 0;
        for (std::size_t h = 0; h < CH; ++h) {
            dir[h] = rng.normal();
            dn += dir[h] * dir[h];
        }
        dn = std::sqrt(dn) + 1e-12;
        for (std::size_t i = 0; i < cfg.low_caps; ++i) {
            // back-project the target direction through this pair's weights
            double bn = 0;
            for (std::size_t l = 0; l < CL; ++l) {
                double acc = 0;
                for (std::size_t h = 0; h < CH; ++h)
                    acc += static_cast<double>(inst.W.at4(i, target, l, h)) * dir[h] / dn;
                base[l] = acc;
                bn += acc * acc;
            }
            bn = std::sqrt(bn) + 1e-12;
            double n2 = 0;
            for (std::size_t l = 0; l < CL; ++l) {
                const double val = signal_gain * base[l] / bn + noise_sigma * rng.normal();
                inst.u.at3(k, i, l) = static_cast<float>(val);
                n2 += val * val;
            }
            const double f = n2 > 0 ? n2 / ((1.0 + n2) * std::sqrt(n2)) : 0.0;
            for (std::size_t l = 0; l < CL; ++l)
                inst.u.at3(k, i, l) = static_cast<float>(inst.u.at3(k, i, l) * f);
        }
    }
    return inst;
}

} // namespace pimcaps::caps
