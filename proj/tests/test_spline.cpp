#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "igs/spline.hpp"

using namespace igs;

namespace {

double eval_one(const UnivariateBasis& b, int i, double xi, int der = 0) {
    double ders[24];
    const int first = b.evaluate(xi, der, ders);
    const int p = b.degree();
    if (i < first || i > first + p) return 0.0;
    return ders[der * (p + 1) + (i - first)];
}

} // namespace

TEST_CASE("open uniform knot vectors") {
    SUBCASE("n=5 p=2") {
        const KnotVector kv = make_open_uniform_knots(5, 2);
        const std::vector<double> want = {0, 0, 0, 1.0 / 3.0, 2.0 / 3.0, 1, 1, 1};
        REQUIRE(kv.knots.size() == want.size());
        for (size_t i = 0; i < want.size(); ++i)
            CHECK(kv.knots[i] == doctest::Approx(want[i]).epsilon(1e-15));
        CHECK(kv.cardinality() == 5);
    }
    SUBCASE("n=2 p=1 single element") {
        const KnotVector kv = make_open_uniform_knots(2, 1);
        CHECK(kv.knots == std::vector<double>{0, 0, 1, 1});
    }
    SUBCASE("n=10 p=3") {
        const KnotVector kv = make_open_uniform_knots(10, 3);
        REQUIRE(kv.knots.size() == 14);
        for (int i = 0; i < 4; ++i) CHECK(kv.knots[i] == 0.0);
        for (int i = 1; i <= 6; ++i)
            CHECK(kv.knots[3 + i] == doctest::Approx(i / 7.0).epsilon(1e-15));
        for (int i = 10; i < 14; ++i) CHECK(kv.knots[i] == 1.0);
    }
    SUBCASE("n <= p rejected") {
        CHECK_THROWS_AS(make_open_uniform_knots(3, 3), std::invalid_argument);
        CHECK_THROWS_AS(make_open_uniform_knots(2, 5), std::invalid_argument);
    }
}

TEST_CASE("degree-0 basis is the span indicator") {
    UnivariateBasis b(make_open_uniform_knots(4, 0));
    // four spans [0,1/4),[1/4,1/2),[1/2,3/4),[3/4,1]
    double v[1];
    CHECK(b.evaluate(0.1, 0, v) == 0);
    CHECK(v[0] == 1.0);
    CHECK(b.evaluate(0.6, 0, v) == 2);
    CHECK(v[0] == 1.0);
    CHECK(eval_one(b, 0, 0.6) == 0.0);
}

TEST_CASE("hat function midpoint") {
    UnivariateBasis b(KnotVector{{0, 0, 0.5, 1, 1}, 1});
    double v[2];
    const int first = b.evaluate(0.25, 0, v);
    CHECK(first == 0);
    CHECK(v[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("partition of unity and non-negativity") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int p = 1; p <= 3; ++p) {
        UnivariateBasis b(make_open_uniform_knots(10, p));
        for (int trial = 0; trial < 100; ++trial) {
            const double xi = dist(rng);
            double v[8];
            b.evaluate(xi, 0, v);
            double sum = 0.0;
            for (int j = 0; j <= p; ++j) {
                sum += v[j];
                CHECK(v[j] >= -1e-14);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("support bounds") {
    UnivariateBasis b(make_open_uniform_knots(8, 2));
    const auto& knots = b.knot_vector().knots;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double xi = dist(rng);
        for (int i = 0; i < b.size(); ++i) {
            if (xi < knots[i] || xi > knots[i + 3]) CHECK(eval_one(b, i, xi) == 0.0);
        }
    }
}

TEST_CASE("out-of-domain evaluation rejected") {
    UnivariateBasis b(make_open_uniform_knots(6, 2));
    double v[8];
    CHECK_THROWS_AS(b.evaluate(-0.01, 0, v), std::domain_error);
    CHECK_THROWS_AS(b.evaluate(1.01, 0, v), std::domain_error);
}

TEST_CASE("derivatives vs central finite differences") {
    for (int p = 2; p <= 3; ++p) {
        UnivariateBasis b(make_open_uniform_knots(9, p));
        const double pts[] = {0.11, 0.27, 0.42, 0.63, 0.88};
        const double step = 1e-6;
        for (double xi : pts) {
            for (int i = 0; i < b.size(); ++i) {
                const double fd =
                    (eval_one(b, i, xi + step) - eval_one(b, i, xi - step)) / (2 * step);
                const double an = eval_one(b, i, xi, 1);
                if (std::abs(fd) > 1e-8)
                    CHECK(an == doctest::Approx(fd).epsilon(1e-6));
                const double fd2 = (eval_one(b, i, xi + step, 1) -
                                    eval_one(b, i, xi - step, 1)) / (2 * step);
                const double an2 = eval_one(b, i, xi, 2);
                if (std::abs(fd2) > 1e-6)
                    CHECK(an2 == doctest::Approx(fd2).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("continuity across interior knots") {
    for (int p = 2; p <= 3; ++p) {
        UnivariateBasis b(make_open_uniform_knots(10, p));
        const int spans = 10 - p;
        const double eps = 1e-9;
        for (int k = 1; k < spans; ++k) {
            const double knot = static_cast<double>(k) / spans;
            for (int i = 0; i < b.size(); ++i) {
                for (int der = 0; der <= p - 1; ++der) {
                    const double lo = eval_one(b, i, knot - eps, der);
                    const double hi = eval_one(b, i, knot + eps, der);
                    CHECK(std::abs(hi - lo) < 1e-4); // continuous, finite slope gap O(eps)
                }
            }
        }
    }
}

TEST_CASE("uniform refinement") {
    SUBCASE("single linear element") {
        UnivariateBasis coarse(KnotVector{{0, 0, 1, 1}, 1});
        RefinedBasis rb = uniform_refine(coarse);
        CHECK(rb.basis.knot_vector().knots == std::vector<double>{0, 0, 0.5, 1, 1});
        Eigen::MatrixXd T(rb.prolongation);
        REQUIRE(T.rows() == 3);
        REQUIRE(T.cols() == 2);
        Eigen::MatrixXd want(3, 2);
        want << 1, 0, 0.5, 0.5, 0, 1;
        CHECK((T - want).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("constants preserved") {
        UnivariateBasis coarse(make_open_uniform_knots(7, 2));
        RefinedBasis rb = uniform_refine(coarse);
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(coarse.size());
        Eigen::VectorXd fine = rb.prolongation * ones;
        CHECK((fine.array() - 1.0).abs().maxCoeff() < 1e-13);
    }
    SUBCASE("pointwise equivalence, cubic") {
        UnivariateBasis coarse(make_open_uniform_knots(10, 3));
        RefinedBasis rb = uniform_refine(coarse);
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        std::vector<double> cc(coarse.size());
        for (auto& c : cc) c = dist(rng);
        Eigen::VectorXd cvec = Eigen::Map<Eigen::VectorXd>(cc.data(), cc.size());
        Eigen::VectorXd fvec = rb.prolongation * cvec;
        std::vector<double> fc(fvec.data(), fvec.data() + fvec.size());
        for (int s = 0; s < 50; ++s) {
            const double xi = dist(rng);
            CHECK(std::abs(coarse.evaluate_function(cc, xi) -
                           rb.basis.evaluate_function(fc, xi)) < 1e-12);
        }
    }
}
