#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "igs/integrator.hpp"

using namespace igs;

namespace {

MappingOperator sphere_mapping(HierarchicalBasis& basis, double R,
                               const QuadratureRule& q) {
    MappingOperator map;
    map.basis = &basis;
    map.control = l2_project_vec3(
        basis,
        [R](int f, double xi, double eta) { return cube_to_sphere(face_point(f, xi, eta), R); },
        ProjectionMeasure::Parametric, nullptr, q);
    return map;
}

} // namespace

TEST_CASE("parameter validation") {
    ModelParameters par;
    CHECK_NOTHROW(par.validate());
    par.d1 = 0.0;
    CHECK_THROWS(par.validate());
    par.d1 = 0.2;
    par.K = -1.0;
    CHECK_THROWS(par.validate());
}

TEST_CASE("coercivity condition") {
    ModelParameters par; // F = 0.04, H = 0.06
    SUBCASE("static geometry passes for any step") {
        for (double h : {1e-3, 1.0, 50.0}) {
            CoercivityReport r = coercivity_check(0.0, par, h);
            CHECK(r.pass);
            CHECK(r.margin_u > 0.0);
            CHECK(r.margin_v > 0.0);
        }
    }
    SUBCASE("fast shrinkage fails for large steps") {
        CoercivityReport r = coercivity_check(-2.0, par, 1.0);
        CHECK_FALSE(r.pass);
        CHECK(r.margin_u < 0.0);
        // the same rate is fine with a small enough step
        CHECK(coercivity_check(-2.0, par, 0.1).pass);
    }
    SUBCASE("margins are ordered by the extra drainage term") {
        CoercivityReport r = coercivity_check(-0.5, par, 1.0);
        CHECK(r.margin_v > r.margin_u); // F + H > F shifts the rate up
    }
}

TEST_CASE("uniform state (u,v) = (1,0) is a scheme fixpoint") {
    HierarchicalBasis basis(6, 2, 0);
    const QuadratureRule q = QuadratureRule::gauss(6);
    MappingOperator map = sphere_mapping(basis, 40.0, q);
    const int n = basis.num_dofs();
    ModelParameters par;
    for (double h : {0.01, 0.5, 10.0}) {
        Eigen::VectorXd c = Eigen::VectorXd::Ones(n);
        Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
        AssembledSystem sys = assemble(basis, map, map, h, c, d, q);
        ConcentrationStep st = step_concentrations(sys, par, h, c, d, false, 1e-13);
        CHECK((st.c_new - c).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(st.d_new.cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("mass exchange is exact with F = H = K = 0") {
    HierarchicalBasis basis(6, 2, 0);
    const QuadratureRule q = QuadratureRule::gauss(6);
    MappingOperator map = sphere_mapping(basis, 40.0, q);
    const int n = basis.num_dofs();
    ModelParameters par;
    par.F = par.H = par.K = 0.0;
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    Eigen::VectorXd c(n), d(n);
    for (int i = 0; i < n; ++i) {
        c[i] = 0.5 + 0.5 * dist(rng);
        d[i] = 0.3 * dist(rng);
    }
    const double h = 0.2;
    AssembledSystem sys0 = assemble(basis, map, map, h, c, d, q);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const double total0 = bilinear_energy(sys0.A, ones, c + d);
    for (int k = 0; k < 10; ++k) {
        AssembledSystem sys = assemble(basis, map, map, h, c, d, q);
        ConcentrationStep st = step_concentrations(sys, par, h, c, d, false, 1e-13);
        c = st.c_new;
        d = st.d_new;
        const double total = bilinear_energy(sys.A, ones, c + d);
        CHECK(std::abs(total - total0) / std::abs(total0) < 1e-10);
    }
}

TEST_CASE("constant v grows the sphere radially") {
    HierarchicalBasis basis(8, 2, 0);
    const QuadratureRule q = QuadratureRule::gauss(6);
    const double R = 40.0;
    MappingOperator map = sphere_mapping(basis, R, q);
    const int n = basis.num_dofs();
    ModelParameters par;
    const double h = 1.0, vconst = 0.5;
    AssembledSystem sys = assemble(basis, map, map, h, Eigen::VectorXd::Ones(n),
                                   Eigen::VectorXd::Constant(n, vconst), q);
    Eigen::MatrixX3d grown = update_geometry(sys.A, basis, map,
                                             Eigen::VectorXd::Constant(n, vconst), h, par,
                                             q, 1e-12);
    MappingOperator map2;
    map2.basis = &basis;
    map2.control = grown;
    const double dr = h * par.K * vconst; // outward normal offset
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> dist(0.1, 0.9);
    for (int s = 0; s < 60; ++s) {
        const int f = s % 6;
        const double xi = dist(rng), eta = dist(rng);
        const Vec3 p0 = map.value(f, xi, eta);
        const Vec3 p1 = map2.value(f, xi, eta);
        CHECK(p1.norm() - p0.norm() == doctest::Approx(dr).epsilon(2e-2));
    }
}

TEST_CASE("geometry update is the identity when K = 0") {
    HierarchicalBasis basis(6, 2, 0);
    const QuadratureRule q = QuadratureRule::gauss(6);
    MappingOperator map = sphere_mapping(basis, 40.0, q);
    const int n = basis.num_dofs();
    ModelParameters par;
    par.K = 0.0;
    AssembledSystem sys = assemble(basis, map, map, 1.0, Eigen::VectorXd::Ones(n),
                                   Eigen::VectorXd::Zero(n), q);
    Eigen::MatrixX3d grown = update_geometry(sys.A, basis, map,
                                             Eigen::VectorXd::Constant(n, 0.4), 1.0, par, q,
                                             1e-13);
    CHECK((grown - map.control).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("PID worked examples") {
    PidGains g;
    SUBCASE("constant error 0.5") {
        CHECK(pid_select(1.0, 0.5, 0.5, 0.5, g, 1e-6, 100.0) ==
              doctest::Approx(std::pow(2.0, 0.175)).epsilon(1e-12));
    }
    SUBCASE("error spike to 2") {
        CHECK(pid_select(1.0, 2.0, 1.0, 1.0, g, 1e-6, 100.0) ==
              doctest::Approx(std::pow(2.0, -0.26)).epsilon(1e-12));
    }
    SUBCASE("unit error history is a fixpoint") {
        CHECK(pid_select(3.7, 1.0, 1.0, 1.0, g, 1e-6, 100.0) ==
              doctest::Approx(3.7).epsilon(1e-15));
    }
    SUBCASE("clamping") {
        CHECK(pid_select(1.0, 1e-8, 1e-8, 1e-8, g, 1e-6, 2.5) == doctest::Approx(2.5));
        CHECK(pid_select(1e-3, 100.0, 1.0, 1.0, g, 5e-4, 100.0) == doctest::Approx(5e-4));
    }
    SUBCASE("nonpositive errors are floored, not fatal") {
        CHECK_NOTHROW(pid_select(1.0, 0.0, 1.0, 1.0, g, 1e-6, 100.0));
        CHECK(std::isfinite(pid_select(1.0, 0.0, -1.0, 0.0, g, 1e-6, 100.0)));
    }
}
