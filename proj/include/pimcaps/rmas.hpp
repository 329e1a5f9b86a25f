#ifndef PIMCAPS_RMAS_HPP
#define PIMCAPS_RMAS_HPP

#include <cstddef>
#include <vector>

namespace pimcaps::rmas {

/// Inputs of the host-vs-PE priority decision for one host operation.
///   n_max: vaults the host operation touches.
///   q_bar: average PE queue depth over those vaults.
///   gamma_v / gamma_h: impact factors of the in-memory and host sides,
///   larger for memory-intensive phases.
struct SchedulerInput {
    std::size_t n_max = 0;
    double q_bar = 0.0;
    std::vector<double> q_per_vault;
    double gamma_v = 1.0;
    double gamma_h = 1.0;

    void validate() const;
};

/// Full host deferral (n_h = 0) is priced through this constant so the
/// singular host term stays finite.
inline constexpr double kSerialDeferral = 0.5;

/// kappa(n_h) = gamma_v * n_h * q_bar + gamma_h * n_max / n_h for n_h >= 1;
/// kappa(0) = gamma_h * n_max / kSerialDeferral.
double kappa(std::size_t n_h, const SchedulerInput& in);

/// Number of vaults granted host priority: the closed form
/// round(sqrt(n_max * gamma_h / (q_bar * gamma_v))) corrected to the exact
/// integer minimizer of kappa (the convexity of kappa puts the minimum at a
/// neighbor of the real root; ties resolve toward the rounded value).
/// q_bar * gamma_v = 0 maps to n_max; gamma_h = 0 maps to 0.
std::size_t optimal_nh(const SchedulerInput& in);

/// The optimal_nh vaults with the smallest queue depths, ties by lowest
/// vault id.
std::vector<std::size_t> grant_priority(const SchedulerInput& in);

} // namespace pimcaps::rmas

#endif
