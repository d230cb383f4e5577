#include "igs/geometry.hpp"

#include <cmath>

namespace igs {

Vec3 cube_to_sphere(const Vec3& c, double R) {
    const double x = c.x(), y = c.y(), z = c.z();
    if (std::abs(std::max({std::abs(x), std::abs(y), std::abs(z)}) - 1.0) > 1e-12)
        throw std::invalid_argument("cube_to_sphere: point not on a face of [-1,1]^3");
    return R * Vec3(
        x * std::sqrt(1.0 - y * y / 2.0 - z * z / 2.0 + y * y * z * z / 3.0),
        y * std::sqrt(1.0 - z * z / 2.0 - x * x / 2.0 + z * z * x * x / 3.0),
        z * std::sqrt(1.0 - x * x / 2.0 - y * y / 2.0 + x * x * y * y / 3.0));
}

Vec3 MappingOperator::value(int face, double xi, double eta) const {
    ActiveEval ev;
    basis->evaluate(face, xi, eta, 0, ev);
    Vec3 s = Vec3::Zero();
    for (size_t k = 0; k < ev.dofs.size(); ++k)
        s += ev.val[k] * control.row(ev.dofs[k]).transpose();
    return s;
}

MetricData metric_from_eval(const MappingOperator& map, const ActiveEval& ev) {
    MetricData md;
    md.jacobian.setZero();
    for (size_t k = 0; k < ev.dofs.size(); ++k) {
        const Vec3 e = map.control.row(ev.dofs[k]).transpose();
        md.jacobian.col(0) += ev.dxi[k] * e;
        md.jacobian.col(1) += ev.deta[k] * e;
    }
    md.g = md.jacobian.transpose() * md.jacobian;
    const double det = md.g(0, 0) * md.g(1, 1) - md.g(0, 1) * md.g(1, 0);
    if (det <= kDegenerateMetricEps)
        throw DegenerateMetric("metric degenerate: det g = " + std::to_string(det));
    md.g_inv << md.g(1, 1) / det, -md.g(0, 1) / det,
                -md.g(1, 0) / det, md.g(0, 0) / det;
    md.sqrt_g = std::sqrt(det);
    const Vec3 cr = md.jacobian.col(0).cross(md.jacobian.col(1));
    md.normal = cr / cr.norm();
    return md;
}

MetricData metric_at(const MappingOperator& map, int face, double xi, double eta) {
    ActiveEval ev;
    map.basis->evaluate(face, xi, eta, 1, ev);
    return metric_from_eval(map, ev);
}

CurvatureData curvature_from_eval(const MappingOperator& map, const ActiveEval& ev,
                                  const MetricData& md) {
    Vec3 sxx = Vec3::Zero(), sxy = Vec3::Zero(), syy = Vec3::Zero();
    for (size_t k = 0; k < ev.dofs.size(); ++k) {
        const Vec3 e = map.control.row(ev.dofs[k]).transpose();
        sxx += ev.dxx[k] * e;
        sxy += ev.dxy[k] * e;
        syy += ev.dyy[k] * e;
    }
    CurvatureData cd;
    cd.second_form << sxx.dot(md.normal), sxy.dot(md.normal),
                      sxy.dot(md.normal), syy.dot(md.normal);
    cd.shape = md.g_inv * cd.second_form;
    const double tr = cd.shape.trace();
    const double det = cd.shape.determinant();
    double disc = tr * tr - 4.0 * det;
    if (disc < 0.0) disc = 0.0; // roundoff; the shape operator has real spectrum
    cd.kappa1 = 0.5 * (tr + std::sqrt(disc));
    cd.kappa2 = 0.5 * (tr - std::sqrt(disc));
    return cd;
}

CurvatureData curvature_at(const MappingOperator& map, int face, double xi, double eta) {
    if (xi <= 0.0 || xi >= 1.0 || eta <= 0.0 || eta >= 1.0)
        throw UnsupportedLocation("curvature_at: undefined on patch edges");
    ActiveEval ev;
    map.basis->evaluate(face, xi, eta, 2, ev);
    const MetricData md = metric_from_eval(map, ev);
    return curvature_from_eval(map, ev, md);
}

double log_metric_rate(double sqrt_g_now, double sqrt_g_prev, double h_prev) {
    if (sqrt_g_now <= 0.0 || sqrt_g_prev <= 0.0)
        throw DegenerateMetric("log_metric_rate: nonpositive sqrt(g)");
    if (h_prev <= 0.0)
        throw std::invalid_argument("log_metric_rate: nonpositive step size");
    return (std::log(sqrt_g_now) - std::log(sqrt_g_prev)) / h_prev;
}

} // namespace igs
