#include "igs/solvers.hpp"

#include <cmath>
#include <string>

namespace igs {

CGResult solve_spd(const SpMat& M, const Eigen::VectorXd& b, double tol, int max_iter,
                   const Eigen::VectorXd* x0) {
    const int n = static_cast<int>(b.size());
    if (M.rows() != n || M.cols() != n)
        throw std::invalid_argument("solve_spd: dimension mismatch");
    if (max_iter < 0) max_iter = 10 * n + 100;

    const double bnorm = b.norm();
    CGResult res;
    if (bnorm == 0.0) {
        res.x = Eigen::VectorXd::Zero(n);
        return res;
    }

    Eigen::VectorXd inv_diag(n);
    for (int i = 0; i < n; ++i) {
        const double d = M.coeff(i, i);
        inv_diag[i] = (d > 0.0) ? 1.0 / d : 1.0;
    }

    Eigen::VectorXd x = x0 ? *x0 : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = b - M * x;
    Eigen::VectorXd z = inv_diag.asDiagonal() * r;
    Eigen::VectorXd p = z;
    double rz = r.dot(z);

    for (int it = 0; it < max_iter; ++it) {
        if (r.norm() / bnorm <= tol) {
            res.x = std::move(x);
            res.iterations = it;
            res.rel_residual = r.norm() / bnorm;
            return res;
        }
        const Eigen::VectorXd Mp = M * p;
        const double alpha = rz / p.dot(Mp);
        x += alpha * p;
        r -= alpha * Mp;
        z = inv_diag.asDiagonal() * r;
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    if (r.norm() / bnorm <= tol) {
        res.x = std::move(x);
        res.iterations = max_iter;
        res.rel_residual = r.norm() / bnorm;
        return res;
    }
    throw NumericalFailure("solve_spd: CG did not converge, relative residual " +
                           std::to_string(r.norm() / bnorm) + " after " +
                           std::to_string(max_iter) + " iterations");
}

// Plain-vector entry point used by the assembly-side projections.
Eigen::VectorXd solve_spd_vec(const SpMat& M, const Eigen::VectorXd& b, double tol,
                              int max_iter, int* iters_out) {
    CGResult r = solve_spd(M, b, tol, max_iter);
    if (iters_out) *iters_out = r.iterations;
    return std::move(r.x);
}

QPResult positivity_step(const SpMat& Q, const Eigen::VectorXd& f, double tol) {
    const int n = static_cast<int>(f.size());
    QPResult res;

    CGResult unc = solve_spd(Q, f, tol);
    res.x = std::move(unc.x);

    std::vector<bool> active(n, false);
    bool any_negative = false;
    for (int i = 0; i < n; ++i) {
        if (res.x[i] < 0.0) {
            active[i] = true;
            any_negative = true;
        }
    }
    if (!any_negative) {
        res.kkt_residual = 0.0;
        return res;
    }

    // Violation thresholds sit above the CG solve noise (relative tolerance
    // `tol` times the data scale); tighter absolute cutoffs make the loop
    // cycle on noise-level multipliers near degenerate constraints.
    const double fscale = std::max(1.0, f.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd warm;
    const int max_outer = 4 * n + 50;
    for (int outer = 0; outer < max_outer; ++outer) {
        res.outer_iterations = outer + 1;

        // Solve the reduced system on the free set by masking rows/columns.
        SpMat Qr = Q;
        Eigen::VectorXd fr = f;
        for (int k = 0; k < Qr.outerSize(); ++k)
            for (SpMat::InnerIterator it(Qr, k); it; ++it)
                if (active[it.row()] || active[it.col()])
                    it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
        for (int i = 0; i < n; ++i)
            if (active[i]) fr[i] = 0.0;
        CGResult red = solve_spd(Qr, fr, tol, -1, warm.size() == n ? &warm : nullptr);
        Eigen::VectorXd x = std::move(red.x);
        for (int i = 0; i < n; ++i)
            if (active[i]) x[i] = 0.0;
        warm = x;

        // Grow the active set while free variables go negative.
        const double xscale = std::max(1.0, x.lpNorm<Eigen::Infinity>());
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            if (!active[i] && x[i] < -10.0 * tol * xscale) {
                active[i] = true;
                changed = true;
            }
        }
        if (changed) continue;

        // Release the active constraint with the most negative multiplier.
        const Eigen::VectorXd grad = Q * x - f;
        double worst = -10.0 * tol * fscale;
        int worst_i = -1;
        for (int i = 0; i < n; ++i) {
            if (active[i] && grad[i] < worst) {
                worst = grad[i];
                worst_i = i;
            }
        }
        if (worst_i >= 0) {
            active[worst_i] = false;
            continue;
        }

        res.x = std::move(x);
        // Relative KKT residual: primal feasibility, active-set gradient sign,
        // and complementarity, scaled by the data magnitude.
        double kkt = 0.0;
        for (int i = 0; i < n; ++i) {
            kkt = std::max(kkt, std::max(0.0, -res.x[i]));
            if (active[i]) kkt = std::max(kkt, std::max(0.0, -grad[i]) / fscale);
            kkt = std::max(kkt, std::abs(res.x[i] * grad[i]) / fscale);
        }
        res.kkt_residual = kkt;
        return res;
    }
    throw NumericalFailure("positivity_step: active-set iteration did not converge");
}

} // namespace igs
