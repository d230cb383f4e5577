#pragma once

#include <Eigen/Dense>

#include "igs/basis.hpp"
#include "igs/common.hpp"

namespace igs {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

// Equal-norm projection of a hollow-cube point onto the sphere of radius R.
Vec3 cube_to_sphere(const Vec3& cube_point, double R);

// Control net over a hierarchical global basis, defining the surface
// s(xi,eta) = sum_i e_i w_i per face. Immutable per time step.
struct MappingOperator {
    const HierarchicalBasis* basis = nullptr;
    Eigen::MatrixX3d control; // num_dofs x 3

    Vec3 value(int face, double xi, double eta) const;
};

struct MetricData {
    Mat32 jacobian;
    Mat2 g;
    Mat2 g_inv;
    double sqrt_g = 0.0;
    Vec3 normal;
};

struct CurvatureData {
    Mat2 second_form; // L
    Mat2 shape;       // S = g^{-1} L
    double kappa1 = 0.0, kappa2 = 0.0;
};

// Metric quantities from a precomputed basis evaluation (assembly fast path).
MetricData metric_from_eval(const MappingOperator& map, const ActiveEval& ev);

MetricData metric_at(const MappingOperator& map, int face, double xi, double eta);

// Principal curvatures via the shape operator. Refuses patch-edge points,
// where the C0 basis leaves curvature undefined.
CurvatureData curvature_from_eval(const MappingOperator& map, const ActiveEval& ev,
                                  const MetricData& md);
CurvatureData curvature_at(const MappingOperator& map, int face, double xi, double eta);

// Inverse-metric inner product <grad a, grad b>_g = (da)^T g^{-1} (db).
inline double grad_inner(const MetricData& md, const Vec2& da, const Vec2& db) {
    return da.dot(md.g_inv * db);
}

// Backward difference of ln(sqrt g) over the previous step.
double log_metric_rate(double sqrt_g_now, double sqrt_g_prev, double h_prev);

} // namespace igs
