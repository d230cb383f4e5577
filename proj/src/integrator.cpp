#include "igs/integrator.hpp"

#include <cmath>

namespace igs {

CoercivityReport coercivity_check(double min_rate, const ModelParameters& par, double h) {
    CoercivityReport rep;
    rep.margin_u = (min_rate + par.F) * h + 1.0;
    rep.margin_v = (min_rate + par.F + par.H) * h + 1.0;
    rep.pass = rep.margin_u > 0.0 && rep.margin_v > 0.0;
    return rep;
}

ConcentrationStep step_concentrations(const AssembledSystem& sys,
                                      const ModelParameters& par, double h,
                                      const Eigen::VectorXd& c, const Eigen::VectorXd& d,
                                      bool positivity, double tol) {
    const SpMat Mu = sys.A * (1.0 + h * par.F) + (par.d1 * h) * sys.D + h * sys.B;
    const SpMat Mv = sys.A * (1.0 + h * (par.F + par.H)) + (par.d2 * h) * sys.D + h * sys.B;
    const Eigen::VectorXd bu = h * par.F * sys.w_vec - h * sys.f_r + sys.A * c;
    const Eigen::VectorXd bv = h * sys.f_r + sys.A * d;

    ConcentrationStep out;
    if (!positivity) {
        CGResult ru = solve_spd(Mu, bu, tol, -1, &c);
        CGResult rv = solve_spd(Mv, bv, tol, -1, &d);
        out.c_new = std::move(ru.x);
        out.d_new = std::move(rv.x);
        out.cg_iterations = ru.iterations + rv.iterations;
    } else {
        // The (c,d) blocks are independent, so the block-diagonal QP splits.
        QPResult qu = positivity_step(Mu, bu, tol);
        QPResult qv = positivity_step(Mv, bv, tol);
        out.c_new = std::move(qu.x);
        out.d_new = std::move(qv.x);
        out.cg_iterations = qu.outer_iterations + qv.outer_iterations;
        out.kkt_residual = std::max(qu.kkt_residual, qv.kkt_residual);
    }
    return out;
}

Eigen::MatrixX3d update_geometry(const SpMat& mass, const HierarchicalBasis& basis,
                                 const MappingOperator& s_now,
                                 const Eigen::VectorXd& d_new, double h,
                                 const ModelParameters& par, const QuadratureRule& q,
                                 double tol) {
    const Eigen::MatrixX3d rhs =
        assemble_growth_rhs(basis, s_now, d_new, h * par.K, q);
    Eigen::MatrixX3d e_new(basis.num_dofs(), 3);
    for (int j = 0; j < 3; ++j) {
        const Eigen::VectorXd x0 = s_now.control.col(j);
        e_new.col(j) = solve_spd(mass, rhs.col(j), tol, -1, &x0).x;
    }
    return e_new;
}

double pid_select(double h, double e_k, double e_km1, double e_km2, const PidGains& gains,
                  double h_min, double h_max) {
    constexpr double floor = 1e-12;
    e_k = std::max(e_k, floor);
    e_km1 = std::max(e_km1, floor);
    e_km2 = std::max(e_km2, floor);
    const double factor = std::pow(e_km1 / e_k, gains.kP) *
                          std::pow(1.0 / e_k, gains.kI) *
                          std::pow(e_km1 * e_km1 / (e_k * e_km2), gains.kD);
    return std::clamp(factor * h, h_min, h_max);
}

} // namespace igs
