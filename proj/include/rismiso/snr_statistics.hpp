#ifndef RISMISO_SNR_STATISTICS_HPP
#define RISMISO_SNR_STATISTICS_HPP

// Statistical models for the magnitude sum Y = sum_i |h_i| under the
// optimal beamformers, and hence for the received SNR M*gamma_bar*Y^2.
// Two fits are carried side by side: a zero-truncated Gaussian from the
// central limit theorem and a moment-matched Gamma distribution. The
// small-argument expansion of the exact CDF of Y supplies the deep lower
// tail where both fits lose accuracy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>

#include "rismiso/errors.hpp"
#include "rismiso/specfun.hpp"

namespace rismiso {

// Zero-truncated Gaussian fit of Y. trunc_const renormalizes the mass
// removed below zero: C = 1/Q(-mu_y/sigma_y), which stays within [1, 2]
// and is indistinguishable from 1 once mu_y/sigma_y is a few units.
struct CltModel {
    double mu_y = 0.0;
    double sigma_y = 0.0;
    double trunc_const = 1.0;
    std::size_t k_elements = 0;
};

// Gamma fit of Y with the same first two moments: shape*scale = mu_y,
// shape*scale^2 = sigma_y^2.
struct GammaModel {
    double shape = 0.0;
    double scale = 0.0;
    std::size_t k_elements = 0;
};

enum class SnrModel { clt, gamma };

inline CltModel clt_model(std::size_t k) {
    detail::check_count_positive(k, "Element count");
    const double kd = static_cast<double>(k);
    const double mu_y = kd * std::sqrt(std::numbers::pi) / 2.0;
    const double sigma_y = std::sqrt(kd * (4.0 - std::numbers::pi) / 4.0);
    const double trunc_const = 1.0 / q_function(-mu_y / sigma_y);
    return {mu_y, sigma_y, trunc_const, k};
}

inline GammaModel gamma_model(std::size_t k) {
    detail::check_count_positive(k, "Element count");
    const double kd = static_cast<double>(k);
    const double shape = kd * std::numbers::pi / (4.0 - std::numbers::pi);
    const double scale = (4.0 - std::numbers::pi) / (2.0 * std::sqrt(std::numbers::pi));
    return {shape, scale, k};
}

inline double clt_cdf_y(double y, const CltModel& model) {
    if (y < 0.0) {
        return 0.0;
    }
    const double value =
        1.0 - model.trunc_const * q_function((y - model.mu_y) / model.sigma_y);
    // The analytic value is already in [0, 1]; rounding can push the ends a
    // few ulps outside (C*Q cancels to 0 exactly at y = 0 only in exact
    // arithmetic).
    return std::clamp(value, 0.0, 1.0);
}

inline double clt_pdf_y(double y, const CltModel& model) {
    if (y < 0.0) {
        return 0.0;
    }
    const double zscore = (y - model.mu_y) / model.sigma_y;
    return model.trunc_const /
           (std::sqrt(2.0 * std::numbers::pi) * model.sigma_y) *
           std::exp(-0.5 * zscore * zscore);
}

inline double gamma_cdf_y(double y, const GammaModel& model) {
    if (y <= 0.0) {
        return 0.0;
    }
    return regularized_lower_gamma(model.shape, y / model.scale);
}

inline double gamma_pdf_y(double y, const GammaModel& model) {
    // shape = K*pi/(4-pi) >= pi/(4-pi) > 1 for every K >= 1, so the density
    // vanishes at the origin. Log-domain evaluation keeps the density finite
    // for large shapes (Gamma(shape) overflows past shape ~ 170).
    if (y <= 0.0) {
        return 0.0;
    }
    const double log_density = (model.shape - 1.0) * std::log(y) -
                               y / model.scale - std::lgamma(model.shape) -
                               model.shape * std::log(model.scale);
    return std::exp(log_density);
}

// CDF of the received SNR M*gamma_bar*Y^2 by substitution:
// F_gamma(z) = F_Y(sqrt(z/(M*gamma_bar))) under the selected model.
inline double snr_cdf(double z, std::size_t k, std::size_t m, double gamma_bar,
                      SnrModel method) {
    detail::check_count_positive(m, "Transmit antenna count");
    detail::check_finite(gamma_bar, "Average transmit SNR");
    detail::check_positive(gamma_bar, "Average transmit SNR");
    if (z < 0.0) {
        return 0.0;
    }
    const double y = std::sqrt(z / (static_cast<double>(m) * gamma_bar));
    if (method == SnrModel::clt) {
        return clt_cdf_y(y, clt_model(k));
    }
    return gamma_cdf_y(y, gamma_model(k));
}

// Small-argument expansion of the exact CDF of Y:
// F_Y(y) ~ 1 - e^{-t} sum_{i<K} t^i/i! with t = y^2/(2dK) and
// d = ((2K-1)!!)^{1/K}/(2K). The truncated Poisson tail is exactly the
// regularized lower incomplete gamma at integer shape K, which is how it
// is evaluated here (stable for any t).
inline double small_argument_cdf_y(double y, std::size_t k) {
    detail::check_count_positive(k, "Element count");
    detail::check_finite(y, "Magnitude-sum argument");
    if (y <= 0.0) {
        return 0.0;
    }
    const double kd = static_cast<double>(k);
    // 2dK = ((2K-1)!!)^{1/K}, kept in log form until the last moment.
    const double two_d_k = std::exp(log_double_factorial_odd(k) / kd);
    const double t = y * y / two_d_k;
    return regularized_lower_gamma(kd, t);
}

// Leading-order term of the small-argument expansion:
// F_Y(y) ~ y^{2K} / ((2K-1)!! K!), evaluated in log domain so it stays
// finite down to the deepest representable tail.
inline double leading_order_cdf_y(double y, std::size_t k) {
    detail::check_count_positive(k, "Element count");
    detail::check_finite(y, "Magnitude-sum argument");
    if (y <= 0.0) {
        return 0.0;
    }
    const double kd = static_cast<double>(k);
    const double log_value = 2.0 * kd * std::log(y) -
                             log_double_factorial_odd(k) -
                             std::lgamma(kd + 1.0);
    return std::exp(log_value);
}

// Exact mean of the received SNR: M*gamma_bar*(K^2*pi + K*(4-pi))/4, from
// E[Y^2] = var(Y) + (E[Y])^2 of the underlying Rayleigh sum.
inline double mean_snr(std::size_t m, std::size_t k, double gamma_bar) {
    detail::check_count_positive(m, "Transmit antenna count");
    detail::check_count_positive(k, "Element count");
    detail::check_finite(gamma_bar, "Average transmit SNR");
    detail::check_non_negative(gamma_bar, "Average transmit SNR");
    const double kd = static_cast<double>(k);
    return static_cast<double>(m) * gamma_bar *
           (kd * kd * std::numbers::pi + kd * (4.0 - std::numbers::pi)) / 4.0;
}

} // namespace rismiso

#endif // RISMISO_SNR_STATISTICS_HPP
