#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>

#include "igs/geometry.hpp"

namespace igs {

using SpMat = Eigen::SparseMatrix<double>;

// Tensor Gauss-Legendre rule applied per knot span of the finest active level.
struct QuadratureRule {
    int order = 6;
    std::vector<double> nodes;   // on [-1,1]
    std::vector<double> weights;

    static QuadratureRule gauss(int order = 6);
};

// All weak-form matrices and vectors on the current geometry, with respect to
// the measure sqrt(g_k) dxi.
struct AssembledSystem {
    SpMat A;            // mass
    SpMat D;            // stiffness (inverse-metric gradients)
    SpMat B;            // dilution
    Eigen::VectorXd f_r;  // reaction u v^2
    Eigen::VectorXd w_vec; // load
};

// Pointwise extrema gathered during the assembly sweep; feeds the coercivity
// check and the run guards.
struct AssemblyStats {
    double min_rate = 0.0, max_rate = 0.0; // dt ln sqrt(g)
    double min_sqrt_g = 0.0;
    double min_normal_dot_prev = 1.0;      // n^k . n^{k-1}
    double area = 0.0;
};

AssembledSystem assemble(const HierarchicalBasis& basis,
                         const MappingOperator& s_now, const MappingOperator& s_prev,
                         double h_prev,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                         const QuadratureRule& q, AssemblyStats* stats = nullptr);

// Right-hand side of the weak geometry update:
// rhs_{i,j} = int w_i (s^k + h K v^{k+1} n^k)_j sqrt(g_k) dxi.
Eigen::MatrixX3d assemble_growth_rhs(const HierarchicalBasis& basis,
                                     const MappingOperator& s_now,
                                     const Eigen::VectorXd& v_new, double hK,
                                     const QuadratureRule& q);

inline double bilinear_energy(const SpMat& M, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y) {
    if (M.rows() != x.size() || M.cols() != y.size())
        throw std::invalid_argument("bilinear_energy: dimension mismatch");
    return x.dot(M * y);
}

enum class ProjectionMeasure { Parametric, Surface };

// Least-squares projection through the mass-matrix normal equations. The
// surface measure requires a geometry mapping on the same basis.
Eigen::VectorXd l2_project(const HierarchicalBasis& basis,
                           const std::function<double(int, double, double)>& target,
                           ProjectionMeasure measure, const MappingOperator* geom,
                           const QuadratureRule& q, double tol = 1e-12);

Eigen::MatrixX3d l2_project_vec3(const HierarchicalBasis& basis,
                                 const std::function<Vec3(int, double, double)>& target,
                                 ProjectionMeasure measure, const MappingOperator* geom,
                                 const QuadratureRule& q, double tol = 1e-12);

// L2(Omega) mismatch (parametric measure) between a pointwise target and a
// spline field given by coefficients.
double l2_mismatch_vec3(const HierarchicalBasis& basis,
                        const std::function<Vec3(int, double, double)>& target,
                        const Eigen::MatrixX3d& coeffs, const QuadratureRule& q);

// Surface-weighted statistics of a scalar spline field.
struct FieldStats {
    double min = 0.0, max = 0.0, mean = 0.0, variance = 0.0, area = 0.0;
};
FieldStats field_surface_stats(const HierarchicalBasis& basis, const MappingOperator& s,
                               const Eigen::VectorXd& coeffs, const QuadratureRule& q);

// Debug dump in (row, col, value) triplet form.
void write_triplets(std::ostream& os, const SpMat& M);

} // namespace igs
