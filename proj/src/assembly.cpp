#include "igs/assembly.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace igs {

QuadratureRule QuadratureRule::gauss(int order) {
    if (order < 1) throw std::invalid_argument("QuadratureRule: order must be positive");
    QuadratureRule q;
    q.order = order;
    q.nodes.resize(order);
    q.weights.resize(order);
    // Newton iteration on the Legendre polynomial P_order.
    for (int i = 0; i < order; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double p0 = 1.0, p1 = x, dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            p0 = 1.0;
            p1 = x;
            for (int k = 2; k <= order; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        q.nodes[order - 1 - i] = x;
        q.weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return q;
}

namespace {

// Visit every tensor Gauss point of every knot-span cell of the finest active
// level, on every face. The weight passed to the callback carries the cell
// Jacobian. cell_first flags the first point of each cell.
template <class Fn>
void sweep_points(const HierarchicalBasis& basis, const QuadratureRule& q, int nders,
                  Fn&& fn) {
    const int L = basis.finest_active_level();
    const UnivariateBasis& uni = basis.level(L).uni();
    const int ns = uni.num_spans();
    ActiveEval ev;
    for (int f = 0; f < kNumFaces; ++f) {
        for (int sy = 0; sy < ns; ++sy) {
            const double y0 = uni.span_begin(sy), y1 = uni.span_end(sy);
            for (int sx = 0; sx < ns; ++sx) {
                const double x0 = uni.span_begin(sx), x1 = uni.span_end(sx);
                const double jac = 0.25 * (x1 - x0) * (y1 - y0);
                bool first = true;
                for (int gy = 0; gy < q.order; ++gy) {
                    const double eta = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * q.nodes[gy];
                    for (int gx = 0; gx < q.order; ++gx) {
                        const double xi = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * q.nodes[gx];
                        basis.evaluate(f, xi, eta, nders, ev);
                        fn(f, first, xi, eta, ev, q.weights[gx] * q.weights[gy] * jac);
                        first = false;
                    }
                }
            }
        }
    }
}

} // namespace

// defined in solvers.cpp
Eigen::VectorXd solve_spd_vec(const SpMat& M, const Eigen::VectorXd& b, double tol,
                              int max_iter, int* iters_out);

AssembledSystem assemble(const HierarchicalBasis& basis,
                         const MappingOperator& s_now, const MappingOperator& s_prev,
                         double h_prev,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                         const QuadratureRule& q, AssemblyStats* stats) {
    const int N = basis.num_dofs();
    AssembledSystem sys;
    sys.f_r = Eigen::VectorXd::Zero(N);
    sys.w_vec = Eigen::VectorXd::Zero(N);

    std::vector<Eigen::Triplet<double>> tA, tD, tB;
    Eigen::MatrixXd Ae, De, Be;
    std::vector<int> cell_dofs;

    AssemblyStats st;
    st.min_rate = std::numeric_limits<double>::infinity();
    st.max_rate = -std::numeric_limits<double>::infinity();
    st.min_sqrt_g = std::numeric_limits<double>::infinity();

    auto flush_cell = [&]() {
        const int nloc = static_cast<int>(cell_dofs.size());
        for (int b = 0; b < nloc; ++b) {
            for (int a = 0; a < nloc; ++a) {
                tA.emplace_back(cell_dofs[a], cell_dofs[b], Ae(a, b));
                tD.emplace_back(cell_dofs[a], cell_dofs[b], De(a, b));
                tB.emplace_back(cell_dofs[a], cell_dofs[b], Be(a, b));
            }
        }
    };

    sweep_points(basis, q, 1, [&](int, bool cell_first, double, double,
                                  const ActiveEval& ev, double w) {
        const int nloc = static_cast<int>(ev.dofs.size());
        if (cell_first) {
            if (!cell_dofs.empty()) flush_cell();
            cell_dofs = ev.dofs; // constant within a cell interior
            Ae = Eigen::MatrixXd::Zero(nloc, nloc);
            De = Eigen::MatrixXd::Zero(nloc, nloc);
            Be = Eigen::MatrixXd::Zero(nloc, nloc);
        }
        const MetricData md = metric_from_eval(s_now, ev);
        const MetricData md_prev = metric_from_eval(s_prev, ev);
        const double rate = log_metric_rate(md.sqrt_g, md_prev.sqrt_g, h_prev);
        const double wq = w * md.sqrt_g;

        double u_val = 0.0, v_val = 0.0;
        for (int k = 0; k < nloc; ++k) {
            u_val += u[ev.dofs[k]] * ev.val[k];
            v_val += v[ev.dofs[k]] * ev.val[k];
        }
        const double react = u_val * v_val * v_val;

        for (int b = 0; b < nloc; ++b) {
            const Vec2 gib = md.g_inv * Vec2(ev.dxi[b], ev.deta[b]);
            for (int a = 0; a < nloc; ++a) {
                const double mass = ev.val[a] * ev.val[b] * wq;
                Ae(a, b) += mass;
                Be(a, b) += mass * rate;
                De(a, b) += (ev.dxi[a] * gib.x() + ev.deta[a] * gib.y()) * wq;
            }
        }
        for (int a = 0; a < nloc; ++a) {
            sys.f_r[ev.dofs[a]] += ev.val[a] * react * wq;
            sys.w_vec[ev.dofs[a]] += ev.val[a] * wq;
        }

        st.min_rate = std::min(st.min_rate, rate);
        st.max_rate = std::max(st.max_rate, rate);
        st.min_sqrt_g = std::min(st.min_sqrt_g, md.sqrt_g);
        st.min_normal_dot_prev =
            std::min(st.min_normal_dot_prev, md.normal.dot(md_prev.normal));
        st.area += wq;
    });
    if (!cell_dofs.empty()) flush_cell();

    sys.A.resize(N, N);
    sys.D.resize(N, N);
    sys.B.resize(N, N);
    sys.A.setFromTriplets(tA.begin(), tA.end());
    sys.D.setFromTriplets(tD.begin(), tD.end());
    sys.B.setFromTriplets(tB.begin(), tB.end());
    if (stats) *stats = st;
    return sys;
}

Eigen::MatrixX3d assemble_growth_rhs(const HierarchicalBasis& basis,
                                     const MappingOperator& s_now,
                                     const Eigen::VectorXd& v_new, double hK,
                                     const QuadratureRule& q) {
    Eigen::MatrixX3d rhs = Eigen::MatrixX3d::Zero(basis.num_dofs(), 3);
    sweep_points(basis, q, 1, [&](int, bool, double, double, const ActiveEval& ev,
                                  double w) {
        const MetricData md = metric_from_eval(s_now, ev);
        Vec3 s = Vec3::Zero();
        double v_val = 0.0;
        for (size_t k = 0; k < ev.dofs.size(); ++k) {
            s += ev.val[k] * s_now.control.row(ev.dofs[k]).transpose();
            v_val += v_new[ev.dofs[k]] * ev.val[k];
        }
        const Vec3 target = s + hK * v_val * md.normal;
        const double wq = w * md.sqrt_g;
        for (size_t k = 0; k < ev.dofs.size(); ++k)
            rhs.row(ev.dofs[k]) += (ev.val[k] * wq) * target.transpose();
    });
    return rhs;
}

namespace {

SpMat projection_mass(const HierarchicalBasis& basis, ProjectionMeasure measure,
                      const MappingOperator* geom, const QuadratureRule& q) {
    const int N = basis.num_dofs();
    const int nders = (measure == ProjectionMeasure::Surface) ? 1 : 0;
    std::vector<Eigen::Triplet<double>> trips;
    sweep_points(basis, q, nders, [&](int, bool, double, double, const ActiveEval& ev,
                                      double w) {
        const double wq = (measure == ProjectionMeasure::Surface)
                              ? w * metric_from_eval(*geom, ev).sqrt_g
                              : w;
        for (size_t b = 0; b < ev.dofs.size(); ++b)
            for (size_t a = 0; a < ev.dofs.size(); ++a)
                trips.emplace_back(ev.dofs[a], ev.dofs[b], ev.val[a] * ev.val[b] * wq);
    });
    SpMat M(N, N);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

} // namespace

Eigen::VectorXd l2_project(const HierarchicalBasis& basis,
                           const std::function<double(int, double, double)>& target,
                           ProjectionMeasure measure, const MappingOperator* geom,
                           const QuadratureRule& q, double tol) {
    if (measure == ProjectionMeasure::Surface && geom == nullptr)
        throw std::invalid_argument("l2_project: surface measure needs a geometry");
    const int nders = (measure == ProjectionMeasure::Surface) ? 1 : 0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.num_dofs());
    sweep_points(basis, q, nders, [&](int f, bool, double xi, double eta,
                                      const ActiveEval& ev, double w) {
        double wq = (measure == ProjectionMeasure::Surface)
                        ? w * metric_from_eval(*geom, ev).sqrt_g
                        : w;
        const double t = target(f, xi, eta);
        for (size_t k = 0; k < ev.dofs.size(); ++k) rhs[ev.dofs[k]] += ev.val[k] * t * wq;
    });
    const SpMat M = projection_mass(basis, measure, geom, q);
    return solve_spd_vec(M, rhs, tol, -1, nullptr);
}

Eigen::MatrixX3d l2_project_vec3(const HierarchicalBasis& basis,
                                 const std::function<Vec3(int, double, double)>& target,
                                 ProjectionMeasure measure, const MappingOperator* geom,
                                 const QuadratureRule& q, double tol) {
    Eigen::MatrixX3d out(basis.num_dofs(), 3);
    for (int c = 0; c < 3; ++c) {
        auto comp = [&](int f, double xi, double eta) { return target(f, xi, eta)[c]; };
        out.col(c) = l2_project(basis, comp, measure, geom, q, tol);
    }
    return out;
}

double l2_mismatch_vec3(const HierarchicalBasis& basis,
                        const std::function<Vec3(int, double, double)>& target,
                        const Eigen::MatrixX3d& coeffs, const QuadratureRule& q) {
    double acc = 0.0;
    sweep_points(basis, q, 0, [&](int f, bool, double xi, double eta, const ActiveEval& ev,
                                  double w) {
        Vec3 s = Vec3::Zero();
        for (size_t k = 0; k < ev.dofs.size(); ++k)
            s += ev.val[k] * coeffs.row(ev.dofs[k]).transpose();
        acc += (target(f, xi, eta) - s).squaredNorm() * w;
    });
    return std::sqrt(acc);
}

FieldStats field_surface_stats(const HierarchicalBasis& basis, const MappingOperator& s,
                               const Eigen::VectorXd& coeffs, const QuadratureRule& q) {
    FieldStats st;
    st.min = std::numeric_limits<double>::infinity();
    st.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0, sum_sq = 0.0, area = 0.0;
    sweep_points(basis, q, 1, [&](int, bool, double, double, const ActiveEval& ev,
                                  double w) {
        const double wq = w * metric_from_eval(s, ev).sqrt_g;
        double val = 0.0;
        for (size_t k = 0; k < ev.dofs.size(); ++k) val += coeffs[ev.dofs[k]] * ev.val[k];
        st.min = std::min(st.min, val);
        st.max = std::max(st.max, val);
        sum += val * wq;
        sum_sq += val * val * wq;
        area += wq;
    });
    st.area = area;
    st.mean = sum / area;
    st.variance = sum_sq / area - st.mean * st.mean;
    return st;
}

void write_triplets(std::ostream& os, const SpMat& M) {
    for (int k = 0; k < M.outerSize(); ++k)
        for (SpMat::InnerIterator it(M, k); it; ++it)
            os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

} // namespace igs
