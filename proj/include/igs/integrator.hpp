#pragma once

#include "igs/assembly.hpp"
#include "igs/solvers.hpp"

namespace igs {

// Dimensionless model constants: feed rate F, drainage rate H, growth factor
// K, diffusion constants d1, d2.
struct ModelParameters {
    double F = 0.04;
    double H = 0.06;
    double K = 0.001;
    double d1 = 0.2;
    double d2 = 0.1;

    void validate() const {
        if (d1 <= 0.0 || d2 <= 0.0)
            throw std::invalid_argument("ModelParameters: diffusion constants must be positive");
        if (K < 0.0 || F < 0.0 || H < 0.0)
            throw std::invalid_argument("ModelParameters: F, H, K must be non-negative");
    }
};

struct PidGains {
    double kP = 0.075;
    double kI = 0.175;
    double kD = 0.01;
    double tau = 0.01;
};

// Sufficient condition for SPD concentration systems:
// (dt ln sqrt(g) + F) h + 1 > 0 and its F+H analogue, evaluated at the
// infimum of the rate over quadrature points.
struct CoercivityReport {
    bool pass = false;
    double margin_u = 0.0;
    double margin_v = 0.0;
};
CoercivityReport coercivity_check(double min_rate, const ModelParameters& par, double h);

struct ConcentrationStep {
    Eigen::VectorXd c_new, d_new;
    int cg_iterations = 0;      // total over both solves
    double kkt_residual = 0.0;  // only meaningful with positivity enabled
};

// Solve the two implicit concentration systems on the current geometry.
ConcentrationStep step_concentrations(const AssembledSystem& sys,
                                      const ModelParameters& par, double h,
                                      const Eigen::VectorXd& c, const Eigen::VectorXd& d,
                                      bool positivity, double tol = 1e-10);

// Weak normal-offset geometry update: solve A e^{k+1}_j = rhs_j with
// rhs_i = int w_i (s^k + h K v^{k+1} n^k)_j sqrt(g_k).
Eigen::MatrixX3d update_geometry(const SpMat& mass, const HierarchicalBasis& basis,
                                 const MappingOperator& s_now,
                                 const Eigen::VectorXd& d_new, double h,
                                 const ModelParameters& par, const QuadratureRule& q,
                                 double tol = 1e-10);

// PID step-size rule on the error history (e_k, e_{k-1}, e_{k-2}), clamped to
// [h_min, h_max]. Nonpositive errors are floored at 1e-12.
double pid_select(double h, double e_k, double e_km1, double e_km2, const PidGains& gains,
                  double h_min, double h_max);

} // namespace igs
