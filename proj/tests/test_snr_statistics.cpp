// Distribution-model tests. Oracles: extended-precision direct formula
// evaluation (truncated Poisson sums, exact integer double factorials),
// adaptive Simpson quadrature for unit-mass checks, and Monte-Carlo
// empirical CDFs drawn through the counter-based generator.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "rismiso/rng.hpp"
#include "rismiso/snr_statistics.hpp"
#include "support.hpp"

namespace {

double rel_err(double value, long double reference) {
    return static_cast<double>(
        std::fabs(static_cast<long double>(value) - reference) /
        std::fabs(reference));
}

// Sorted sample of Y = sum_i |h_i| with one generator stream per trial,
// mirroring how the simulation layer partitions randomness.
std::vector<double> sorted_magnitude_sums(std::size_t k, std::size_t trials,
                                          std::uint64_t seed) {
    std::vector<double> out(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        rismiso::PhiloxRng rng(seed, t);
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            sum += std::abs(rng.complex_normal());
        }
        out[t] = sum;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Truncated-Poisson small-argument CDF 1 - e^{-t} sum_{i<K} t^i/i! with
// t = y^2 / ((2K-1)!!)^{1/K}, evaluated through the complementary tail
// sum_{i>=K} e^{-t} t^i/i! so tiny CDF levels carry no cancellation.
long double poisson_tail(long double t, unsigned k) {
    long double term = std::exp(-t);
    for (unsigned i = 1; i <= k; ++i) term *= t / static_cast<long double>(i);
    long double sum = term;
    for (unsigned i = k + 1; i <= k + 400; ++i) {
        term *= t / static_cast<long double>(i);
        sum += term;
        if (term < sum * 1e-25L) break;
    }
    return sum;
}

long double direct_small_argument(long double y, unsigned k) {
    long double df = 1.0L;
    for (unsigned i = 1; i <= k; ++i) df *= 2.0L * i - 1.0L;
    const long double t = y * y / std::pow(df, 1.0L / k);
    return poisson_tail(t, k);
}

// Inverse of the small-argument CDF in t = y^2/((2K-1)!!)^{1/K} by
// bisection, used to anchor ratio checks at analytic quantile levels.
long double solve_small_argument_t(unsigned k, long double target) {
    long double lo = 0.0L;
    long double hi = 64.0L;
    for (int iter = 0; iter < 200; ++iter) {
        const long double mid = (lo + hi) / 2.0L;
        (poisson_tail(mid, k) < target ? lo : hi) = mid;
    }
    return (lo + hi) / 2.0L;
}

} // namespace

TEST_CASE("clt_model fields match the Rayleigh-sum moments") {
    const auto m16 = rismiso::clt_model(16);
    CHECK(rel_err(m16.mu_y, 8.0L * std::sqrt(std::numbers::pi_v<long double>)) < 1e-13);
    CHECK(rel_err(m16.sigma_y * m16.sigma_y,
                  4.0L * (4.0L - std::numbers::pi_v<long double>)) < 1e-13);
    CHECK(m16.mu_y == Catch::Approx(14.17963).epsilon(1e-6));
    CHECK(m16.sigma_y * m16.sigma_y == Catch::Approx(3.43363).epsilon(1e-5));
    CHECK(m16.trunc_const - 1.0 < 1e-13);
    CHECK(m16.trunc_const >= 1.0);
    CHECK(m16.k_elements == 16);

    const auto m1 = rismiso::clt_model(1);
    CHECK(rel_err(m1.mu_y, std::sqrt(std::numbers::pi_v<long double>) / 2.0L) < 1e-13);
    CHECK(rel_err(m1.sigma_y * m1.sigma_y,
                  (4.0L - std::numbers::pi_v<long double>) / 4.0L) < 1e-13);
    // Truncation constant oracle: C = 1 / Q(-mu/sigma) in extended precision.
    const long double ratio = static_cast<long double>(m1.mu_y) / m1.sigma_y;
    const long double c_oracle =
        1.0L / (0.5L * std::erfc(-ratio / std::sqrt(2.0L)));
    CHECK(rel_err(m1.trunc_const, c_oracle) < 1e-12);

    for (std::size_t k : {1, 2, 3, 4, 16, 36, 100}) {
        const auto model = rismiso::clt_model(k);
        CHECK(model.trunc_const >= 1.0);
        CHECK(model.trunc_const <= 2.0);
    }
}

TEST_CASE("gamma_model fields and exact mean matching") {
    const auto g16 = rismiso::gamma_model(16);
    CHECK(g16.shape == Catch::Approx(58.5567).epsilon(1e-5));
    CHECK(g16.scale == Catch::Approx(0.242153).epsilon(1e-5));
    const auto g36 = rismiso::gamma_model(36);
    CHECK(g36.shape == Catch::Approx(131.753).epsilon(1e-5));

    for (std::size_t k : {1, 4, 16, 36, 100}) {
        const auto gamma = rismiso::gamma_model(k);
        const auto clt = rismiso::clt_model(k);
        CHECK(rel_err(gamma.shape * gamma.scale,
                      static_cast<long double>(clt.mu_y)) < 1e-14);
        CHECK(rel_err(gamma.shape * gamma.scale * gamma.scale,
                      static_cast<long double>(clt.sigma_y) * clt.sigma_y) < 1e-12);
    }
}

TEST_CASE("clt_cdf_y endpoint values and monotonicity") {
    const auto model = rismiso::clt_model(16);
    CHECK(rismiso::clt_cdf_y(-1.0, model) == 0.0);
    CHECK(rismiso::clt_cdf_y(0.0, model) == Catch::Approx(0.0).margin(1e-13));
    CHECK(rismiso::clt_cdf_y(model.mu_y, model) ==
          Catch::Approx(1.0 - model.trunc_const / 2.0).epsilon(1e-14));
    CHECK(rismiso::clt_cdf_y(model.mu_y + 40.0 * model.sigma_y, model) == 1.0);

    for (std::size_t k : {1, 16, 36}) {
        const auto m = rismiso::clt_model(k);
        double prev = 0.0;
        const double hi = m.mu_y + 12.0 * m.sigma_y;
        for (int i = 0; i <= 2000; ++i) {
            const double y = -1.0 + (hi + 1.0) * i / 2000.0;
            const double f = rismiso::clt_cdf_y(y, m);
            CHECK(f >= prev);
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
            prev = f;
        }
    }
}

TEST_CASE("clt_pdf_y peak value and unit mass") {
    const auto model = rismiso::clt_model(16);
    CHECK(rismiso::clt_pdf_y(-0.5, model) == 0.0);
    const double peak = model.trunc_const /
                        std::sqrt(2.0 * std::numbers::pi * model.sigma_y * model.sigma_y);
    CHECK(rismiso::clt_pdf_y(model.mu_y, model) == Catch::Approx(peak).epsilon(1e-14));

    for (std::size_t k : {1, 16, 36}) {
        const auto m = rismiso::clt_model(k);
        const auto mass = test_support::adaptive_simpson(
            [&](long double y) {
                return static_cast<long double>(
                    rismiso::clt_pdf_y(static_cast<double>(y), m));
            },
            0.0L, static_cast<long double>(m.mu_y + 12.0 * m.sigma_y));
        CHECK(std::fabs(static_cast<double>(mass) - 1.0) < 1e-10);
    }
}

TEST_CASE("gamma_cdf_y endpoints and monotonicity") {
    const auto model = rismiso::gamma_model(16);
    CHECK(rismiso::gamma_cdf_y(0.0, model) == 0.0);
    CHECK(rismiso::gamma_cdf_y(-2.0, model) == 0.0);
    const double far = model.shape * model.scale +
                       40.0 * std::sqrt(model.shape) * model.scale;
    CHECK(rismiso::gamma_cdf_y(far, model) == Catch::Approx(1.0).epsilon(1e-12));

    for (std::size_t k : {1, 16, 36}) {
        const auto m = rismiso::gamma_model(k);
        double prev = 0.0;
        const double hi = m.shape * m.scale + 12.0 * std::sqrt(m.shape) * m.scale;
        for (int i = 0; i <= 2000; ++i) {
            const double y = hi * i / 2000.0;
            const double f = rismiso::gamma_cdf_y(y, m);
            CHECK(f >= prev);
            CHECK(f <= 1.0);
            prev = f;
        }
    }
}

TEST_CASE("gamma_pdf_y mode location and unit mass") {
    const auto model = rismiso::gamma_model(16);
    CHECK(rismiso::gamma_pdf_y(0.0, model) == 0.0);
    CHECK(rismiso::gamma_pdf_y(-1.0, model) == 0.0);
    const double mode = (model.shape - 1.0) * model.scale;
    const double at_mode = rismiso::gamma_pdf_y(mode, model);
    CHECK(at_mode >= rismiso::gamma_pdf_y(mode * (1.0 + 1e-4), model));
    CHECK(at_mode >= rismiso::gamma_pdf_y(mode * (1.0 - 1e-4), model));

    for (std::size_t k : {1, 16, 36}) {
        const auto m = rismiso::gamma_model(k);
        // The +12 standard deviation cut leaves ~5e-9 of tail mass at small
        // shapes (the Gamma tail is heavier than Gaussian there); a flat
        // margin in the shape domain pushes the remainder below 1e-30.
        const double hi = m.scale * (m.shape + 12.0 * std::sqrt(m.shape) + 60.0);
        const auto mass = test_support::adaptive_simpson(
            [&](long double y) {
                return static_cast<long double>(
                    rismiso::gamma_pdf_y(static_cast<double>(y), m));
            },
            0.0L, static_cast<long double>(hi));
        CHECK(std::fabs(static_cast<double>(mass) - 1.0) < 1e-10);
    }
}

TEST_CASE("both fits track the empirical distribution of Y") {
    const std::size_t trials = 1000000;
    for (std::size_t k : {16, 36}) {
        const auto sample = sorted_magnitude_sums(k, trials, 2000 + k);
        const auto clt = rismiso::clt_model(k);
        const auto gamma = rismiso::gamma_model(k);

        const double ks_clt = test_support::kolmogorov_distance(
            sample, [&](double y) { return rismiso::clt_cdf_y(y, clt); });
        const double ks_gamma = test_support::kolmogorov_distance(
            sample, [&](double y) { return rismiso::gamma_cdf_y(y, gamma); });
        CHECK(ks_clt <= 0.02);
        CHECK(ks_gamma <= 0.02);

        // Lower-tail ordering at the empirical 0.1% quantile: the Gamma fit
        // must sit at least as close to the empirical CDF as the truncated
        // Gaussian does.
        const std::size_t tail_index = trials / 1000;
        const double y_tail = sample[tail_index];
        const double empirical = static_cast<double>(tail_index) /
                                 static_cast<double>(trials);
        const double gamma_gap =
            std::fabs(rismiso::gamma_cdf_y(y_tail, gamma) - empirical);
        const double clt_gap =
            std::fabs(rismiso::clt_cdf_y(y_tail, clt) - empirical);
        CHECK(gamma_gap <= clt_gap);

        if (k == 16) {
            // Spot value near the mean of Y.
            const double at = 14.18;
            const auto below = std::lower_bound(sample.begin(), sample.end(), at);
            const double emp_at =
                static_cast<double>(below - sample.begin()) / trials;
            CHECK(std::fabs(rismiso::gamma_cdf_y(at, gamma) - emp_at) <= 0.02);
        }
    }
}

TEST_CASE("snr_cdf composes the Y models through the SNR substitution") {
    const std::size_t k = 16;
    const std::size_t m = 16;
    const double gamma_bar = 1.0;
    const auto clt = rismiso::clt_model(k);
    const auto gamma = rismiso::gamma_model(k);

    CHECK(rismiso::snr_cdf(0.0, k, m, gamma_bar, rismiso::SnrModel::clt) == 0.0);
    CHECK(rismiso::snr_cdf(0.0, k, m, gamma_bar, rismiso::SnrModel::gamma) == 0.0);
    CHECK(rismiso::snr_cdf(-1.0, k, m, gamma_bar, rismiso::SnrModel::clt) == 0.0);

    const double at_mean_y = static_cast<double>(m) * gamma_bar * clt.mu_y * clt.mu_y;
    CHECK(rismiso::snr_cdf(at_mean_y, k, m, gamma_bar, rismiso::SnrModel::clt) ==
          Catch::Approx(1.0 - clt.trunc_const / 2.0).epsilon(1e-13));

    for (int i = 1; i <= 50; ++i) {
        const double z = 16.0 * i * i; // quadratic grid reaching past the mean
        const double y = std::sqrt(z / (static_cast<double>(m) * gamma_bar));
        CHECK(rel_err(rismiso::snr_cdf(z, k, m, gamma_bar, rismiso::SnrModel::clt),
                      static_cast<long double>(rismiso::clt_cdf_y(y, clt))) < 1e-13);
        CHECK(rel_err(rismiso::snr_cdf(z, k, m, gamma_bar, rismiso::SnrModel::gamma),
                      static_cast<long double>(rismiso::gamma_cdf_y(y, gamma))) <
              1e-13);
    }

    CHECK_THROWS_AS(rismiso::snr_cdf(1.0, k, m, 0.0, rismiso::SnrModel::clt),
                    std::domain_error);
    CHECK_THROWS_AS(rismiso::snr_cdf(1.0, k, m, -1.0, rismiso::SnrModel::gamma),
                    std::domain_error);
}

TEST_CASE("snr_cdf tracks the empirical SNR distribution near the mean") {
    const std::size_t trials = 1000000;
    const std::size_t k = 16;
    const std::size_t m = 16;
    const auto sample = sorted_magnitude_sums(k, trials, 2016);
    const double z = rismiso::mean_snr(m, k, 1.0);
    const double y_at_z = std::sqrt(z / static_cast<double>(m));
    const auto below = std::lower_bound(sample.begin(), sample.end(), y_at_z);
    const double empirical = static_cast<double>(below - sample.begin()) / trials;
    CHECK(std::fabs(rismiso::snr_cdf(z, k, m, 1.0, rismiso::SnrModel::clt) -
                    empirical) <= 0.02);
    CHECK(std::fabs(rismiso::snr_cdf(z, k, m, 1.0, rismiso::SnrModel::gamma) -
                    empirical) <= 0.02);
}

TEST_CASE("small_argument_cdf_y reductions and direct-sum oracle") {
    CHECK(rismiso::small_argument_cdf_y(0.0, 1) == 0.0);
    CHECK(rismiso::small_argument_cdf_y(0.0, 4) == 0.0);

    // K = 1 collapses to the Rayleigh CDF 1 - e^{-y^2} (d = 1/2).
    for (double y = 0.05; y <= 3.0; y += 0.05) {
        const long double oracle =
            1.0L - std::exp(-static_cast<long double>(y) * y);
        CHECK(rel_err(rismiso::small_argument_cdf_y(y, 1), oracle) < 1e-13);
    }

    // K = 2: t = y^2 / sqrt(3).
    for (double y = 0.1; y <= 2.0; y += 0.1) {
        const long double t =
            static_cast<long double>(y) * y / std::sqrt(3.0L);
        const long double oracle = 1.0L - std::exp(-t) * (1.0L + t);
        CHECK(rel_err(rismiso::small_argument_cdf_y(y, 2), oracle) < 1e-13);
    }

    // General K against the extended-precision truncated Poisson sum.
    for (unsigned k = 1; k <= 6; ++k) {
        for (double y = 0.1; y <= 3.0; y += 0.1) {
            const long double oracle = direct_small_argument(y, k);
            CHECK(rel_err(rismiso::small_argument_cdf_y(y, k), oracle) < 1e-12);
        }
    }

    // Saturation: far from the origin the expansion clamps to one.
    CHECK(rismiso::small_argument_cdf_y(100.0, 4) == 1.0);
}

TEST_CASE("leading_order_cdf_y substitutions and exact-integer oracle") {
    CHECK(rismiso::leading_order_cdf_y(0.0, 3) == 0.0);
    CHECK(rel_err(rismiso::leading_order_cdf_y(0.1, 1), 0.01L) < 1e-14);
    CHECK(rel_err(rismiso::leading_order_cdf_y(0.1, 2), 1e-4L / 6.0L) < 1e-13);

    for (unsigned k = 1; k <= 10; ++k) {
        long double df = 1.0L;
        long double factorial = 1.0L;
        for (unsigned i = 1; i <= k; ++i) {
            df *= 2.0L * i - 1.0L;
            factorial *= i;
        }
        for (double y = 0.05; y <= 2.0; y += 0.15) {
            const long double oracle =
                std::pow(static_cast<long double>(y), 2.0L * k) / (df * factorial);
            CHECK(rel_err(rismiso::leading_order_cdf_y(y, k), oracle) < 1e-12);
        }
    }
}

TEST_CASE("leading order matches the small-argument expansion near zero") {
    // The ratio deviates from 1 by about t*K/(K+1) with t the Poisson
    // argument, so the 1% window is reached at CDF level 1e-4 for K <= 2
    // but needs deeper quantiles as K grows.
    const long double levels[] = {1e-4L, 1e-4L, 3e-7L, 1e-10L};
    for (unsigned k = 1; k <= 4; ++k) {
        const long double t_star = solve_small_argument_t(k, levels[k - 1]);
        long double df = 1.0L;
        for (unsigned i = 1; i <= k; ++i) df *= 2.0L * i - 1.0L;
        const double y_star =
            static_cast<double>(std::sqrt(t_star * std::pow(df, 1.0L / k)));
        const double ratio = rismiso::small_argument_cdf_y(y_star, k) /
                             rismiso::leading_order_cdf_y(y_star, k);
        CHECK(std::fabs(ratio - 1.0) <= 0.01);

        // And the ratio keeps tightening as y decreases.
        const double ratio_deeper = rismiso::small_argument_cdf_y(y_star / 4.0, k) /
                                    rismiso::leading_order_cdf_y(y_star / 4.0, k);
        CHECK(std::fabs(ratio_deeper - 1.0) < std::fabs(ratio - 1.0) + 1e-12);
    }
}

TEST_CASE("mean_snr substitutions and Monte-Carlo agreement") {
    CHECK(rismiso::mean_snr(1, 1, 1.0) == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(rel_err(rismiso::mean_snr(16, 16, 1.0),
                  960.0L * std::numbers::pi_v<long double> + 256.0L) < 1e-13);
    CHECK(rismiso::mean_snr(16, 16, 2.0) ==
          Catch::Approx(2.0 * rismiso::mean_snr(16, 16, 1.0)).epsilon(1e-14));

    const std::size_t trials = 1000000;
    const auto sample = sorted_magnitude_sums(16, trials, 2024);
    long double acc = 0.0L;
    for (const double y : sample) {
        acc += 16.0L * static_cast<long double>(y) * y;
    }
    const double mc_mean = static_cast<double>(acc / trials);
    CHECK(rel_err(mc_mean, static_cast<long double>(rismiso::mean_snr(16, 16, 1.0))) <
          0.005);
}
