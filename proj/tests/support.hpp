#ifndef RISMISO_TESTS_SUPPORT_HPP
#define RISMISO_TESTS_SUPPORT_HPP

// Shared oracle helpers for the test suite: dense rank-revealing power
// iteration (deliberately naive, independent of the library's factored
// fast paths) and empirical-distribution utilities.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

namespace test_support {

using Cplx = std::complex<double>;
using DenseMatrix = std::vector<std::vector<Cplx>>;

struct SingularTriple {
    double sigma = 0.0;
    std::vector<Cplx> left;  // length = rows
    std::vector<Cplx> right; // length = cols
};

// Dominant singular triple of a dense matrix via power iteration on A^H A.
// Convergence is immediate for the (numerically) rank-1 matrices this suite
// feeds it, but the loop count covers general well-separated spectra too.
inline SingularTriple power_iteration_top_singular(const DenseMatrix& a,
                                                   int iterations = 200) {
    const std::size_t rows = a.size();
    const std::size_t cols = a.front().size();
    std::vector<Cplx> v(cols);
    std::mt19937 gen(12345);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (auto& x : v) x = Cplx(unif(gen), unif(gen));

    std::vector<Cplx> av(rows);
    auto normalize = [](std::vector<Cplx>& x) {
        double norm_sq = 0.0;
        for (const auto& e : x) norm_sq += std::norm(e);
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& e : x) e *= inv;
        return std::sqrt(norm_sq);
    };
    normalize(v);

    double sigma = 0.0;
    for (int iter = 0; iter < iterations; ++iter) {
        // av = A v
        for (std::size_t i = 0; i < rows; ++i) {
            Cplx acc(0.0, 0.0);
            for (std::size_t j = 0; j < cols; ++j) acc += a[i][j] * v[j];
            av[i] = acc;
        }
        sigma = normalize(av);
        // v = A^H av
        for (std::size_t j = 0; j < cols; ++j) {
            Cplx acc(0.0, 0.0);
            for (std::size_t i = 0; i < rows; ++i) acc += std::conj(a[i][j]) * av[i];
            v[j] = acc;
        }
        normalize(v);
    }
    return SingularTriple{sigma, av, v};
}

// Upper bound on sigma_2 / sigma_1: Frobenius norm of the rank-1-deflated
// residual divided by sigma_1.
inline double second_singular_ratio(const DenseMatrix& a) {
    const SingularTriple top = power_iteration_top_singular(a);
    double residual_sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.front().size(); ++j) {
            const Cplx fit = top.sigma * top.left[i] * std::conj(top.right[j]);
            residual_sq += std::norm(a[i][j] - fit);
        }
    }
    return std::sqrt(residual_sq) / top.sigma;
}

inline double frobenius_norm_sq(const DenseMatrix& a) {
    double sum = 0.0;
    for (const auto& row : a) {
        for (const auto& e : row) sum += std::norm(e);
    }
    return sum;
}

namespace detail {

template <typename F>
long double simpson_panel(const F& f, long double a, long double b) {
    return (b - a) / 6.0L * (f(a) + 4.0L * f((a + b) / 2.0L) + f(b));
}

template <typename F>
long double adaptive_simpson_rec(const F& f, long double a, long double b,
                                 long double whole, long double tol, int depth) {
    const long double mid = (a + b) / 2.0L;
    const long double left = simpson_panel(f, a, mid);
    const long double right = simpson_panel(f, mid, b);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0L * tol) {
        return left + right + (left + right - whole) / 15.0L;
    }
    return adaptive_simpson_rec(f, a, mid, left, tol / 2.0L, depth - 1) +
           adaptive_simpson_rec(f, mid, b, right, tol / 2.0L, depth - 1);
}

} // namespace detail

// Extended-precision adaptive Simpson quadrature, used as the independent
// integration oracle wherever a module claims its density integrates to one
// or its quadrature hits an analytic value.
template <typename F>
long double adaptive_simpson(const F& f, long double a, long double b,
                             long double tol = 1e-13L, int depth = 40) {
    return detail::adaptive_simpson_rec(f, a, b, detail::simpson_panel(f, a, b),
                                        tol, depth);
}

// Exact Kolmogorov distance between the empirical CDF of a sorted sample
// and a model CDF: max over jump points of both one-sided gaps.
inline double kolmogorov_distance(const std::vector<double>& sorted_sample,
                                  const std::function<double(double)>& model_cdf) {
    const double n = static_cast<double>(sorted_sample.size());
    double distance = 0.0;
    for (std::size_t i = 0; i < sorted_sample.size(); ++i) {
        const double f = model_cdf(sorted_sample[i]);
        const double below = static_cast<double>(i) / n;
        const double above = static_cast<double>(i + 1) / n;
        distance = std::max(distance, std::max(std::fabs(f - below), std::fabs(f - above)));
    }
    return distance;
}

} // namespace test_support

#endif // RISMISO_TESTS_SUPPORT_HPP
