#ifndef RISMISO_SPECFUN_HPP
#define RISMISO_SPECFUN_HPP

// Scalar special functions and quadrature primitives shared by the
// statistical and performance layers: Gaussian tail probability,
// regularized lower incomplete gamma, log-domain odd double factorial,
// and Gauss-Legendre rules.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rismiso/errors.hpp"

namespace rismiso {

// Nodes and weights on the reference interval [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int order = 0;
};

// Gaussian tail probability Q(x) = Pr(N(0,1) > x) = erfc(x/sqrt(2))/2.
// glibc's erfc stays monotone and non-zero through the subnormal range,
// so Q remains usable out to x ~ 38 before flushing to zero.
inline double q_function(double x) {
    detail::check_finite(x, "Q-function argument");
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

// Regularized lower incomplete gamma P(s, x) = gamma(s, x)/Gamma(s).
// Series expansion for x < s+1, modified Lentz continued fraction for the
// complement otherwise (the classic split; see Numerical Recipes ch. 6.2).
inline double regularized_lower_gamma(double s, double x) {
    detail::check_finite(s, "Gamma shape");
    detail::check_finite(x, "Incomplete gamma argument");
    detail::check_positive(s, "Gamma shape");
    detail::check_non_negative(x, "Incomplete gamma argument");
    if (x == 0.0) {
        return 0.0;
    }
    const double log_prefactor = -x + s * std::log(x) - std::lgamma(s);
    if (x < s + 1.0) {
        // P(s,x) = x^s e^{-x} / Gamma(s) * sum_{n>=0} x^n / (s(s+1)...(s+n))
        double ap = s;
        double term = 1.0 / s;
        double sum = term;
        for (int n = 0; n < 10000; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-17) {
                break;
            }
        }
        double p = sum * std::exp(log_prefactor);
        return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
    }
    // Q(s,x) = x^s e^{-x} / Gamma(s) * CF(s,x), evaluated by modified Lentz.
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 10000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) {
            break;
        }
    }
    const double q = std::exp(log_prefactor) * h;
    const double p = 1.0 - q;
    return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

// ln((2K-1)!!) as the compensated sum of ln(2i-1), i = 1..K.
// K = 0 returns 0 (empty product); the log form keeps the quantity usable
// far past K ~ 150 where the double factorial itself overflows a double.
inline double log_double_factorial_odd(long long k) {
    if (k < 0) {
        throw std::domain_error("Double factorial index cannot be negative");
    }
    double sum = 0.0;
    double carry = 0.0; // Kahan compensation
    for (long long i = 2; i <= k; ++i) { // i = 1 contributes ln(1) = 0
        const double term = std::log(2.0 * static_cast<double>(i) - 1.0);
        const double y = term - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

// Gauss-Legendre rule on [-1, 1]: roots of the Legendre polynomial P_n via
// Newton iteration on the three-term recurrence, weights 2/((1-x^2) P_n'^2).
inline QuadratureRule gauss_legendre(int order) {
    if (order < 2 || order > 512) {
        throw std::domain_error("Quadrature order must lie in [2, 512]");
    }
    const auto n = static_cast<std::size_t>(order);
    QuadratureRule rule;
    rule.order = order;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Tricomi-style initial guess for the i-th root (descending order).
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * static_cast<double>(j) + 1.0) * z * p1 -
                      static_cast<double>(j) * p2) /
                     (static_cast<double>(j) + 1.0);
            }
            pp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double step = p0 / pp;
            z -= step;
            if (std::fabs(step) < 1e-15) {
                break;
            }
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        const double w = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

// Applies `rule` to integrate f over [a, b] via the affine map from [-1, 1].
template <class F>
double integrate(const QuadratureRule& rule, double a, double b, F&& f) {
    detail::check_finite(a, "Integration lower limit");
    detail::check_finite(b, "Integration upper limit");
    const double half_width = 0.5 * (b - a);
    const double midpoint = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(midpoint + half_width * rule.nodes[i]);
    }
    return half_width * sum;
}

} // namespace rismiso

#endif // RISMISO_SPECFUN_HPP
