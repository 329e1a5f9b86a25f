#ifndef PIMCAPS_PLANNER_HPP
#define PIMCAPS_PLANNER_HPP

#include <array>
#include <string>
#include <vector>

#include "pimcaps/routing.hpp"

namespace pimcaps::plan {

using caps::NetworkConfig;

/// Parallelization axis of the routing procedure.
enum class Dim { B, L, H };

const char* dim_name(Dim d);

/// Routing-stage identifiers used by the parallelizable-dimension table.
enum class Stage { Predict = 1, WeightedSum = 2, Squash = 3, Agreement = 4, Softmax = 5 };

/// Which dimensions each stage can be split along.
std::vector<Dim> parallelizable_dims(Stage stage);

/// Device-dependent cost coefficients and data sizes.
///   alpha: seconds per busiest-vault operation, 1 / (PEs per vault * clock).
///   beta:  seconds per inter-vault byte, 1 / per-vault crossbar share
///          (internal bandwidth / vault count).
/// size_* are bytes per element; s and v are C_H-element vectors, so their
/// per-variable size in the movement model is size * C_H.
struct CostParams {
    std::size_t n_vault = 32;
    double alpha = 1.0 / (16.0 * 312.5e6);
    double beta = 1.0 / (512e9 / 32.0);
    double size_b = 4.0;
    double size_c = 4.0;
    double size_s = 4.0;
    double size_v = 4.0;
    double size_pkt = 16.0;

    void validate() const;

    static CostParams defaults_for(double pes_per_vault, double vault_freq_hz,
                                   double internal_bw, std::size_t n_vault);
};

/// Largest single-vault operation count for a distribution dimension.
double compute_E(Dim dim, const NetworkConfig& cfg, const CostParams& p);

/// Simplified large-N_L form of the B-dimension count, kept for
/// cross-checking against the exact expression.
double compute_E_B_simplified(const NetworkConfig& cfg, const CostParams& p);

/// Inter-vault bytes moved for a distribution dimension. A single vault
/// moves nothing.
double compute_M(Dim dim, const NetworkConfig& cfg, const CostParams& p);

/// S = 1 / (alpha * E + beta * M).
double execution_score(double E, double M, const CostParams& p);

struct DimCost {
    Dim dim;
    double E;
    double M;
    double S;
};

/// Per-dimension costs plus the selected dimension (argmax S, ties broken
/// B > L > H).
struct CostReport {
    std::array<DimCost, 3> per_dim; // order B, L, H
    Dim selected;

    const DimCost& cost(Dim d) const;
};

CostReport select_dimension(const NetworkConfig& cfg, const CostParams& p);

/// Re-plans across PE clock frequencies: alpha scales inversely with
/// frequency, beta stays fixed.
std::vector<std::pair<double, CostReport>> frequency_sweep(
    const NetworkConfig& cfg, const CostParams& p, const std::vector<double>& freqs_hz);

inline const std::vector<double> kDefaultSweepFreqs = {312.5e6, 625e6, 937.5e6};
inline constexpr double kDefaultVaultFreq = 312.5e6;

/// CSV rows "dim,E,M,S,selected" consumed by the report tool.
std::string cost_report_csv(const CostReport& report);

} // namespace pimcaps::plan

#endif
