#pragma once

#include "igs/assembly.hpp"

namespace igs {

// Per-active-function weighted cell-size and squared-curvature indicators.
// kappa is not applicable (-1) for functions supported on patch interfaces.
struct RefinementIndicators {
    Eigen::VectorXd mu;    // int w sqrt(g) / int w
    Eigen::VectorXd kappa; // int (k1^2+k2^2) w sqrt(g) / int w sqrt(g), or -1
};

RefinementIndicators compute_indicators(const HierarchicalBasis& basis,
                                        const MappingOperator& s,
                                        const QuadratureRule& q);

// Global baselines from the initial geometry: means of the initial mu and
// kappa indicators (interface functions excluded from the curvature mean).
struct RefinementBaselines {
    double mu_cell = 0.0;
    double mu_curve = 0.0;
};
RefinementBaselines compute_baselines(const RefinementIndicators& initial);

// Flat DOF indices to refine: mu > k_cell * mu_cell or
// kappa > k_curve * mu_curve (curvature test skipped on interface functions).
std::vector<int> mark(const RefinementIndicators& ind, const RefinementBaselines& base,
                      double k_cell, double k_curve);

} // namespace igs
