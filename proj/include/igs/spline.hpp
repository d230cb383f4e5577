#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "igs/common.hpp"

namespace igs {

// Open knot vector on [0,1]: first and last values repeated degree+1 times.
struct KnotVector {
    std::vector<double> knots;
    int degree = 0;

    int cardinality() const { return static_cast<int>(knots.size()) - degree - 1; }
};

// Uniform open knot vector with basis cardinality n and degree p:
// p+1 zeros, interior knots i/(n-p), p+1 ones.
KnotVector make_open_uniform_knots(int n, int p);

// Univariate B-spline basis over an open knot vector. Immutable after
// construction; evaluation is pure.
class UnivariateBasis {
public:
    explicit UnivariateBasis(KnotVector kv);

    int degree() const { return kv_.degree; }
    int size() const { return n_; }
    const KnotVector& knot_vector() const { return kv_; }

    // Number of nonzero knot spans and the bounds of span k.
    int num_spans() const { return static_cast<int>(span_starts_.size()); }
    double span_begin(int k) const { return kv_.knots[span_starts_[k]]; }
    double span_end(int k) const { return kv_.knots[span_starts_[k] + 1]; }

    // Knot index i with knots[i] <= xi < knots[i+1]; xi = 1 lands in the last
    // nonzero span (left limit).
    int find_span(double xi) const;

    // Cox-de Boor evaluation of the p+1 functions active at xi, with
    // derivatives up to order nders (<= 2). ders is (nders+1) rows of p+1
    // values, row k = k-th derivative. Returns the index of the first active
    // function.
    int evaluate(double xi, int nders, double* ders) const;

    // Sum over all basis functions of coefficient-weighted values (dense
    // coefficient vector of length size()).
    double evaluate_function(const std::vector<double>& coeffs, double xi) const;

private:
    KnotVector kv_;
    int n_;
    std::vector<int> span_starts_; // knot index of each nonzero span
};

// Bisect every nonzero span. Returns the fine basis and the prolongation
// T (fine x coarse): fine coefficients T*x reproduce the coarse function
// exactly.
struct RefinedBasis {
    UnivariateBasis basis;
    Eigen::SparseMatrix<double> prolongation;
};
RefinedBasis uniform_refine(const UnivariateBasis& coarse);

} // namespace igs
