#include "igs/spline.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace igs {

KnotVector make_open_uniform_knots(int n, int p) {
    if (p < 0)
        throw std::invalid_argument("make_open_uniform_knots: degree must be non-negative");
    if (n <= p)
        throw std::invalid_argument("make_open_uniform_knots: need n >= p+1, got n=" +
                                    std::to_string(n) + ", p=" + std::to_string(p));
    KnotVector kv;
    kv.degree = p;
    kv.knots.reserve(n + p + 1);
    for (int i = 0; i <= p; ++i) kv.knots.push_back(0.0);
    const int spans = n - p;
    for (int i = 1; i < spans; ++i) kv.knots.push_back(static_cast<double>(i) / spans);
    for (int i = 0; i <= p; ++i) kv.knots.push_back(1.0);
    return kv;
}

UnivariateBasis::UnivariateBasis(KnotVector kv) : kv_(std::move(kv)) {
    n_ = kv_.cardinality();
    if (n_ < kv_.degree + 1)
        throw std::invalid_argument("UnivariateBasis: knot vector too short");
    for (size_t i = 0; i + 1 < kv_.knots.size(); ++i) {
        if (kv_.knots[i + 1] < kv_.knots[i])
            throw std::invalid_argument("UnivariateBasis: knots must be non-decreasing");
        if (kv_.knots[i + 1] > kv_.knots[i])
            span_starts_.push_back(static_cast<int>(i));
    }
}

int UnivariateBasis::find_span(double xi) const {
    if (xi < 0.0 || xi > 1.0)
        throw std::domain_error("find_span: parameter " + std::to_string(xi) +
                                " outside [0,1]");
    if (xi >= 1.0) return span_starts_.back();
    // binary search over nonzero spans
    int lo = 0, hi = num_spans() - 1;
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        if (xi < span_begin(mid))
            hi = mid - 1;
        else if (xi >= span_end(mid))
            lo = mid + 1;
        else
            lo = hi = mid;
    }
    return span_starts_[lo];
}

int UnivariateBasis::evaluate(double xi, int nders, double* ders) const {
    const int p = kv_.degree;
    const int span = find_span(xi);
    const double* U = kv_.knots.data();

    // Basis functions and knot differences (NURBS-book style table).
    double ndu[8][8]; // p <= 6 is plenty here
    double left[8], right[8];
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = xi - U[span + 1 - j];
        right[j] = U[span + j] - xi;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r]; // knot difference
            double temp = (ndu[j][r] != 0.0) ? ndu[r][j - 1] / ndu[j][r] : 0.0;
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    for (int j = 0; j <= p; ++j) ders[j] = ndu[j][p];

    // Derivatives.
    double a[2][8];
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= nders; ++k) {
            double d = 0.0;
            int rk = r - k, pk = p - k;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            int j1 = (rk >= -1) ? 1 : -rk;
            int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k * (p + 1) + r] = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= nders; ++k) {
        for (int j = 0; j <= p; ++j) ders[k * (p + 1) + j] *= factor;
        factor *= (p - k);
    }
    return span - p;
}

double UnivariateBasis::evaluate_function(const std::vector<double>& coeffs, double xi) const {
    const int p = kv_.degree;
    double vals[8];
    int first = evaluate(xi, 0, vals);
    double sum = 0.0;
    for (int j = 0; j <= p; ++j) sum += coeffs[first + j] * vals[j];
    return sum;
}

namespace {

// Boehm single-knot insertion applied to the accumulated prolongation rows:
// T maps coarse coefficients to coefficients on the current knot vector.
void insert_knot(std::vector<double>& U, int p, double x,
                 std::vector<std::vector<double>>& T) {
    const int m = static_cast<int>(U.size()) - p - 1; // current cardinality
    int k = p;
    while (k + 1 < static_cast<int>(U.size()) - p && U[k + 1] <= x) ++k;

    std::vector<std::vector<double>> Q(m + 1);
    for (int i = 0; i <= k - p; ++i) Q[i] = T[i];
    for (int i = k - p + 1; i <= k; ++i) {
        double denom = U[i + p] - U[i];
        double alpha = (denom > 0.0) ? (x - U[i]) / denom : 0.0;
        Q[i].assign(T[0].size(), 0.0);
        for (size_t c = 0; c < T[0].size(); ++c)
            Q[i][c] = alpha * T[i][c] + (1.0 - alpha) * T[i - 1][c];
    }
    for (int i = k + 1; i <= m; ++i) Q[i] = T[i - 1];
    T = std::move(Q);
    U.insert(U.begin() + (k + 1), x);
}

} // namespace

RefinedBasis uniform_refine(const UnivariateBasis& coarse) {
    const int p = coarse.degree();
    std::vector<double> U = coarse.knot_vector().knots;
    std::vector<std::vector<double>> T(coarse.size(),
                                       std::vector<double>(coarse.size(), 0.0));
    for (int i = 0; i < coarse.size(); ++i) T[i][i] = 1.0;

    for (int s = 0; s < coarse.num_spans(); ++s) {
        double mid = 0.5 * (coarse.span_begin(s) + coarse.span_end(s));
        insert_knot(U, p, mid, T);
    }

    KnotVector fine_kv{U, p};
    UnivariateBasis fine(fine_kv);

    Eigen::SparseMatrix<double> prol(fine.size(), coarse.size());
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < fine.size(); ++i)
        for (int j = 0; j < coarse.size(); ++j)
            if (std::abs(T[i][j]) > 1e-14) trips.emplace_back(i, j, T[i][j]);
    prol.setFromTriplets(trips.begin(), trips.end());
    return RefinedBasis{std::move(fine), std::move(prol)};
}

} // namespace igs
