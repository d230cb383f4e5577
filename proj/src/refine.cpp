#include "igs/refine.hpp"

#include <stdexcept>

namespace igs {

RefinementIndicators compute_indicators(const HierarchicalBasis& basis,
                                        const MappingOperator& s,
                                        const QuadratureRule& q) {
    if (basis.degree() < 2)
        throw std::invalid_argument("compute_indicators: curvature needs degree >= 2");
    const int N = basis.num_dofs();
    Eigen::VectorXd int_w = Eigen::VectorXd::Zero(N);        // int w
    Eigen::VectorXd int_w_g = Eigen::VectorXd::Zero(N);      // int w sqrt(g)
    Eigen::VectorXd int_curv_w_g = Eigen::VectorXd::Zero(N); // int (k1^2+k2^2) w sqrt(g)

    const int L = basis.finest_active_level();
    const UnivariateBasis& uni = basis.level(L).uni();
    const int ns = uni.num_spans();
    ActiveEval ev;
    for (int f = 0; f < kNumFaces; ++f) {
        for (int sy = 0; sy < ns; ++sy) {
            for (int sx = 0; sx < ns; ++sx) {
                const double x0 = uni.span_begin(sx), x1 = uni.span_end(sx);
                const double y0 = uni.span_begin(sy), y1 = uni.span_end(sy);
                const double jac = 0.25 * (x1 - x0) * (y1 - y0);
                for (int gy = 0; gy < q.order; ++gy) {
                    const double eta = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * q.nodes[gy];
                    for (int gx = 0; gx < q.order; ++gx) {
                        const double xi = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * q.nodes[gx];
                        basis.evaluate(f, xi, eta, 2, ev);
                        const MetricData md = metric_from_eval(s, ev);
                        const CurvatureData cd = curvature_from_eval(s, ev, md);
                        const double curv =
                            cd.kappa1 * cd.kappa1 + cd.kappa2 * cd.kappa2;
                        const double w = q.weights[gx] * q.weights[gy] * jac;
                        for (size_t k = 0; k < ev.dofs.size(); ++k) {
                            const int i = ev.dofs[k];
                            int_w[i] += ev.val[k] * w;
                            int_w_g[i] += ev.val[k] * w * md.sqrt_g;
                            int_curv_w_g[i] += curv * ev.val[k] * w * md.sqrt_g;
                        }
                    }
                }
            }
        }
    }

    RefinementIndicators ind;
    ind.mu.resize(N);
    ind.kappa.resize(N);
    for (int i = 0; i < N; ++i) {
        ind.mu[i] = int_w_g[i] / int_w[i];
        ind.kappa[i] = basis.is_interface(i) ? -1.0 : int_curv_w_g[i] / int_w_g[i];
    }
    return ind;
}

RefinementBaselines compute_baselines(const RefinementIndicators& initial) {
    RefinementBaselines base;
    const int N = static_cast<int>(initial.mu.size());
    base.mu_cell = initial.mu.mean();
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < N; ++i) {
        if (initial.kappa[i] >= 0.0) {
            sum += initial.kappa[i];
            ++count;
        }
    }
    base.mu_curve = (count > 0) ? sum / count : 0.0;
    return base;
}

std::vector<int> mark(const RefinementIndicators& ind, const RefinementBaselines& base,
                      double k_cell, double k_curve) {
    if (k_cell <= 1.0 || k_curve <= 1.0)
        throw std::invalid_argument("mark: thresholds must exceed 1");
    std::vector<int> marked;
    for (int i = 0; i < ind.mu.size(); ++i) {
        const bool cell_hit = ind.mu[i] > k_cell * base.mu_cell;
        const bool curve_hit = ind.kappa[i] >= 0.0 && ind.kappa[i] > k_curve * base.mu_curve;
        if (cell_hit || curve_hit) marked.push_back(i);
    }
    return marked;
}

} // namespace igs
