#ifndef RISMISO_PERFORMANCE_HPP
#define RISMISO_PERFORMANCE_HPP

// Analytic link-level metrics built on the statistical models: outage
// probability with its high-SNR tail law (diversity order K, coding gain
// with the double-factorial constant), the Jensen upper bound on the
// ergodic rate, and the average symbol error probability of alpha*Q(
// sqrt(beta*gamma)) modulations — an exact quadrature over the Craig
// representation plus the closed-form bound it saturates at theta = pi/2.
// Every tail expression is composed in log domain: the Gaussian-fit
// prefactor underflows around K = 16 while the compensating exponential
// inside the integrand restores ordinary magnitudes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "rismiso/errors.hpp"
#include "rismiso/snr_statistics.hpp"
#include "rismiso/specfun.hpp"

namespace rismiso {

struct ModulationParams {
    double alpha = 0.0;
    double beta = 0.0;
    std::string name;
};

inline ModulationParams bpsk_modulation() { return {1.0, 2.0, "bpsk"}; }

// Nearest-neighbour form for Gray-mapped QPSK: two dominant error events,
// each at half the symbol energy per dimension.
inline ModulationParams qpsk_modulation() { return {2.0, 1.0, "qpsk"}; }

// Constants of the SEP integrand. upsilon underflows double precision for
// very large K, so log_upsilon is the authoritative representation; every
// consumer composes in log domain.
struct SepConstants {
    double upsilon = 0.0;
    double log_upsilon = 0.0;
    double a = 0.0; // M * beta * gamma_bar
    double b = 0.0; // 1 / (2 sigma_Y^2)
    double c = 0.0; // mu_Y / (2 sigma_Y^2)
};

struct DiversityGain {
    double diversity = 0.0;
    double coding_gain = 0.0;
};

namespace detail {

inline void check_modulation(const ModulationParams& modulation) {
    check_finite(modulation.alpha, "Modulation alpha");
    check_finite(modulation.beta, "Modulation beta");
    if (modulation.alpha <= 0.0 || modulation.alpha > 4.0 ||
        modulation.beta <= 0.0 || modulation.beta > 4.0) {
        throw std::invalid_argument(
            "Modulation constants must lie in (0, 4] for alpha*Q(sqrt(beta*snr)) schemes");
    }
}

} // namespace detail

inline double outage_probability(double gamma_th, std::size_t k, std::size_t m,
                                 double gamma_bar, SnrModel method) {
    detail::check_finite(gamma_th, "Outage threshold");
    detail::check_positive(gamma_th, "Outage threshold");
    return snr_cdf(gamma_th, k, m, gamma_bar, method);
}

// High-SNR tail law. Deliberately not clamped to [0, 1]: outside its
// validity region (gamma_th/gamma_bar of order M or larger) it exceeds 1,
// and hiding that would mask misuse. Presentation layers clamp for display.
inline double asymptotic_outage(double gamma_th, double gamma_bar, std::size_t m,
                                std::size_t k) {
    detail::check_finite(gamma_th, "Outage threshold");
    detail::check_positive(gamma_th, "Outage threshold");
    detail::check_finite(gamma_bar, "Average transmit SNR");
    detail::check_positive(gamma_bar, "Average transmit SNR");
    detail::check_count_positive(m, "Transmit antenna count");
    detail::check_count_positive(k, "Element count");
    const double kd = static_cast<double>(k);
    const double log_value = kd * std::log(gamma_th / gamma_bar) -
                             kd * std::log(static_cast<double>(m)) -
                             log_double_factorial_odd(k);
    return std::exp(log_value);
}

// Diversity order and coding gain of the tail law, i.e. the (O_c, K) with
// asymptotic_outage = (O_c * gamma_bar)^{-K}.
inline DiversityGain diversity_and_coding_gain(std::size_t m, std::size_t k,
                                               double gamma_th) {
    detail::check_count_positive(m, "Transmit antenna count");
    detail::check_count_positive(k, "Element count");
    detail::check_finite(gamma_th, "Outage threshold");
    detail::check_positive(gamma_th, "Outage threshold");
    const double kd = static_cast<double>(k);
    const double coding_gain = static_cast<double>(m) / gamma_th *
                               std::exp(log_double_factorial_odd(k) / kd);
    return {kd, coding_gain};
}

// Jensen bound on the ergodic rate: log2(1 + E[snr]).
inline double rate_upper_bound(std::size_t m, std::size_t k, double gamma_bar) {
    return std::log1p(mean_snr(m, k, gamma_bar)) / std::numbers::ln2;
}

inline SepConstants sep_constants(const ModulationParams& modulation, std::size_t m,
                                  std::size_t k, double gamma_bar) {
    detail::check_modulation(modulation);
    detail::check_count_positive(m, "Transmit antenna count");
    detail::check_finite(gamma_bar, "Average transmit SNR");
    detail::check_non_negative(gamma_bar, "Average transmit SNR");
    const CltModel clt = clt_model(k);
    SepConstants constants;
    constants.a = static_cast<double>(m) * modulation.beta * gamma_bar;
    const double two_sigma_sq = 2.0 * clt.sigma_y * clt.sigma_y;
    constants.b = 1.0 / two_sigma_sq;
    constants.c = clt.mu_y / two_sigma_sq;
    constants.log_upsilon = std::log(modulation.alpha) +
                            std::log(clt.trunc_const) -
                            clt.mu_y * clt.mu_y / two_sigma_sq -
                            0.5 * std::log(2.0 * std::numbers::pi) -
                            std::log(clt.sigma_y);
    constants.upsilon = std::exp(constants.log_upsilon);
    return constants;
}

namespace detail {

// Log of the SEP integrand at angle theta, with the log-prefactor folded
// in: log Upsilon + c^2/A - log sqrt(A) + log Q(-sqrt(2) c / sqrt(A)),
// A = a/(2 sin^2 theta) + b. The c^2/A term cancels the underflowing part
// of log Upsilon, so the sum is well scaled even for large K.
inline double log_sep_integrand(double theta, const SepConstants& constants) {
    const double sin_theta = std::sin(theta);
    const double big_a =
        constants.a / (2.0 * sin_theta * sin_theta) + constants.b;
    const double q_factor =
        q_function(-std::numbers::sqrt2 * constants.c / std::sqrt(big_a));
    return constants.log_upsilon + constants.c * constants.c / big_a -
           0.5 * std::log(big_a) + std::log(q_factor);
}

} // namespace detail

// Average SEP by quadrature over the Craig representation. "Exact" is with
// respect to the Gaussian-fit density of Y; the quadrature itself is
// accurate to the rule's order. Nodes are combined with a max-shift so the
// result survives log-domain magnitudes.
inline double sep_exact(const ModulationParams& modulation, std::size_t m,
                        std::size_t k, double gamma_bar,
                        const QuadratureRule& rule) {
    detail::check_finite(gamma_bar, "Average transmit SNR");
    detail::check_positive(gamma_bar, "Average transmit SNR");
    const SepConstants constants = sep_constants(modulation, m, k, gamma_bar);

    const double half_width = std::numbers::pi / 4.0; // [0, pi/2] mapping
    std::vector<double> log_terms(rule.nodes.size());
    double log_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double theta = half_width * (rule.nodes[i] + 1.0);
        log_terms[i] = detail::log_sep_integrand(theta, constants);
        log_max = std::max(log_max, log_terms[i]);
    }
    if (!std::isfinite(log_max)) {
        return 0.0;
    }
    double shifted_sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        shifted_sum += rule.weights[i] * std::exp(log_terms[i] - log_max);
    }
    // Prefactor 1/sqrt(pi) and the affine Jacobian pi/4.
    const double log_value = log_max + std::log(shifted_sum) +
                             std::log(half_width) -
                             0.5 * std::log(std::numbers::pi);
    return std::clamp(std::exp(log_value), 0.0, 1.0);
}

// Order-doubling wrapper: evaluates at the default order and doubles until
// two successive results agree to the requested relative tolerance.
inline double sep_exact_converged(const ModulationParams& modulation, std::size_t m,
                                  std::size_t k, double gamma_bar,
                                  int initial_order = 64,
                                  double relative_tolerance = 1e-10) {
    detail::check_positive(static_cast<double>(initial_order), "Quadrature order");
    double previous =
        sep_exact(modulation, m, k, gamma_bar, gauss_legendre(initial_order));
    for (int order = 2 * initial_order; order <= 512; order *= 2) {
        const double refined =
            sep_exact(modulation, m, k, gamma_bar, gauss_legendre(order));
        const double scale = std::max(std::fabs(refined), 1e-300);
        if (std::fabs(refined - previous) <= relative_tolerance * scale) {
            return refined;
        }
        previous = refined;
    }
    return previous;
}

// Closed-form bound: the integrand is maximized at theta = pi/2, where
// A = a/2 + b. Not clamped — it is a bound, and near gamma_bar = 0 it
// legitimately approaches alpha/2 (and alpha/2 may reach 1).
inline double sep_upper_bound(const ModulationParams& modulation, std::size_t m,
                              std::size_t k, double gamma_bar) {
    detail::check_finite(gamma_bar, "Average transmit SNR");
    detail::check_positive(gamma_bar, "Average transmit SNR");
    const SepConstants constants = sep_constants(modulation, m, k, gamma_bar);
    const double big_a0 = constants.a / 2.0 + constants.b;
    const double q_factor =
        q_function(-std::numbers::sqrt2 * constants.c / std::sqrt(big_a0));
    // Upsilon * sqrt(pi) / sqrt(2a + 4b) = Upsilon * sqrt(pi) / (2 sqrt(A0)).
    const double log_value = constants.log_upsilon +
                             0.5 * std::log(std::numbers::pi) -
                             std::numbers::ln2 - 0.5 * std::log(big_a0) +
                             constants.c * constants.c / big_a0 +
                             std::log(q_factor);
    return std::exp(log_value);
}

} // namespace rismiso

#endif // RISMISO_PERFORMANCE_HPP
