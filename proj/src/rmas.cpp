#include "pimcaps/rmas.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pimcaps::rmas {

void SchedulerInput::validate() const {
    if (q_bar < 0.0)
        throw std::invalid_argument("SchedulerInput: q_bar must be >= 0");
    if (gamma_v < 0.0 || gamma_h < 0.0)
        throw std::invalid_argument("SchedulerInput: impact factors must be >= 0");
    if (gamma_v == 0.0 && gamma_h == 0.0)
        throw std::invalid_argument("SchedulerInput: gamma_v and gamma_h cannot both be 0");
}

double kappa(std::size_t n_h, const SchedulerInput& in) {
    in.validate();
    if (n_h > in.n_max)
        throw std::out_of_range("kappa: n_h outside [0, n_max]");
    const double nmax = static_cast<double>(in.n_max);
    if (n_h == 0)
        return in.gamma_h * nmax / kSerialDeferral;
    const double nh = static_cast<double>(n_h);
    return in.gamma_v * nh * in.q_bar + in.gamma_h * nmax / nh;
}

std::size_t optimal_nh(const SchedulerInput& in) {
    in.validate();
    if (in.n_max == 0) return 0;
    if (in.q_bar * in.gamma_v == 0.0) return in.n_max; // host term is all there is
    if (in.gamma_h == 0.0) return 0;                   // kappa(0) prices to zero

    const double root =
        std::sqrt(static_cast<double>(in.n_max) * in.gamma_h / (in.q_bar * in.gamma_v));
    const double rounded = std::floor(root + 0.5);
    auto clamp = [&](double v) {
        return static_cast<std::size_t>(
            std::min(std::max(v, 1.0), static_cast<double>(in.n_max)));
    };
    const std::size_t lo = clamp(std::floor(root));
    const std::size_t hi = clamp(std::ceil(root));
    const double k_lo = kappa(lo, in);
    const double k_hi = kappa(hi, in);
    if (k_lo == k_hi) return clamp(rounded);
    return k_lo < k_hi ? lo : hi;
}

std::vector<std::size_t> grant_priority(const SchedulerInput& in) {
    in.validate();
    if (in.q_per_vault.size() != in.n_max)
        throw std::invalid_argument("grant_priority: need one queue depth per targeted vault");
    const std::size_t n_h = optimal_nh(in);
    std::vector<std::size_t> ids(in.n_max);
    std::iota(ids.begin(), ids.end(), 0);
    std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
        return in.q_per_vault[a] < in.q_per_vault[b];
    });
    ids.resize(n_h);
    std::sort(ids.begin(), ids.end());
    return ids;
}

} // namespace pimcaps::rmas
