#ifndef RISMISO_BEAMFORMING_HPP
#define RISMISO_BEAMFORMING_HPP

// Closed-form optimal beamformers for the rank-1 cascaded channel.
// The phase-only surface configuration maximizing phi^H R phi with
// R = M * conj(g) g^T (g = h elementwise* a_K) is phi_i = exp(j*arg(u1_i))
// with u1 the dominant eigenvector conj(g)/||g||; the matched transmit
// beamformer is (phi^T V)^H / ||phi^T V||. Everything runs in O(K + M)
// off the factored channel. A brute-force lattice search over quantized
// phases doubles as the optimality oracle for tiny K.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "rismiso/channel.hpp"
#include "rismiso/errors.hpp"

namespace rismiso {

struct BeamformingSolution {
    ComplexVector phase_shifts;  // phi, length K, unit modulus
    ComplexVector tx_beamformer; // w, length M, unit norm
    double lambda1 = 0.0;        // dominant eigenvalue of R
    ComplexVector u1;            // dominant eigenvector, unit norm
    double snr = 0.0;            // achieved received SNR, linear
    bool degenerate_entries = false;
};

struct BruteForceResult {
    ComplexVector phase_shifts;
    double snr = 0.0;
};

namespace detail {

inline double magnitude_sum(const ComplexVector& v) {
    double sum = 0.0;
    for (const auto& e : v) {
        sum += std::abs(e);
    }
    return sum;
}

// Shared SNR formula so the Monte-Carlo fast path and the closed form
// produce bit-identical values: gamma_bar * M * (sum |h_i|)^2.
inline double snr_from_magnitude_sum(double magnitude_sum_value, std::size_t m,
                                     double gamma_bar) {
    return gamma_bar * static_cast<double>(m) * magnitude_sum_value *
           magnitude_sum_value;
}

} // namespace detail

// Dominant eigenpair of R = M * conj(g) g^T: lambda1 = M * sum |h_i|^2,
// u1 = conj(g)/||g||, both read directly off the factored channel.
inline std::pair<double, ComplexVector> rank1_eigenpair(const CascadedChannel& channel) {
    detail::check_count_positive(channel.ris_factor.size(), "Surface factor length");
    double fading_power = 0.0;
    double factor_norm_sq = 0.0;
    for (std::size_t i = 0; i < channel.ris_factor.size(); ++i) {
        fading_power += std::norm(channel.fading[i]);
        factor_norm_sq += std::norm(channel.ris_factor[i]);
    }
    if (factor_norm_sq == 0.0) {
        throw degenerate_channel_error(
            "All-zero fading vector: dominant eigenvector undefined");
    }
    const double lambda1 =
        static_cast<double>(channel.tx_response.size()) * fading_power;
    const double inv_norm = 1.0 / std::sqrt(factor_norm_sq);
    ComplexVector u1(channel.ris_factor.size());
    for (std::size_t i = 0; i < u1.size(); ++i) {
        u1[i] = std::conj(channel.ris_factor[i]) * inv_norm;
    }
    return {lambda1, u1};
}

// Phase-only maximizer of |u1^H phi|: phi_i = exp(j*arg(u1_i)), which turns
// the triangle inequality into an equality, |u1^H phi| = sum |u1_i|.
// A zero entry has no preferred phase; it is pinned to 1 and flagged.
inline ComplexVector optimal_phase_shifts(const ComplexVector& u1,
                                          bool* degeneracy_flag = nullptr) {
    detail::check_count_positive(u1.size(), "Eigenvector length");
    if (degeneracy_flag != nullptr) {
        *degeneracy_flag = false;
    }
    ComplexVector phi(u1.size());
    for (std::size_t i = 0; i < u1.size(); ++i) {
        const double mag = std::abs(u1[i]);
        if (mag == 0.0) {
            phi[i] = {1.0, 0.0};
            if (degeneracy_flag != nullptr) {
                *degeneracy_flag = true;
            }
        } else {
            phi[i] = u1[i] / mag;
        }
    }
    return phi;
}

// Matched transmit beamformer w = (phi^T V)^H / ||phi^T V||, computed via
// the factored identity phi^T V = (phi^T g) * a_M^H.
inline ComplexVector optimal_tx_beamformer(const ComplexVector& phase_shifts,
                                           const CascadedChannel& channel) {
    detail::check_equal_size(phase_shifts.size(), channel.ris_factor.size(),
                             "Phase vector vs surface factor");
    std::complex<double> s(0.0, 0.0); // phi^T g
    for (std::size_t i = 0; i < phase_shifts.size(); ++i) {
        s += phase_shifts[i] * channel.ris_factor[i];
    }
    const double row_norm =
        std::abs(s) * std::sqrt(static_cast<double>(channel.tx_response.size()));
    if (row_norm == 0.0) {
        throw degenerate_channel_error("phi^T V vanished: matched filter undefined");
    }
    // (s * a_M^H)^H = conj(s) * a_M.
    const std::complex<double> scale = std::conj(s) / row_norm;
    ComplexVector w(channel.tx_response.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        w[j] = scale * channel.tx_response[j];
    }
    return w;
}

// Received SNR gamma_bar * |phi^T V w|^2 for arbitrary (not necessarily
// optimal) beamformers, evaluated through the factored channel:
// phi^T V w = (phi^T g) * (a_M^H w).
inline double received_snr(const ComplexVector& phase_shifts, const ComplexVector& w,
                           const CascadedChannel& channel, double gamma_bar) {
    detail::check_equal_size(phase_shifts.size(), channel.ris_factor.size(),
                             "Phase vector vs surface factor");
    detail::check_equal_size(w.size(), channel.tx_response.size(),
                             "Transmit beamformer vs transmit response");
    detail::check_finite(gamma_bar, "Average transmit SNR");
    detail::check_non_negative(gamma_bar, "Average transmit SNR");
    double w_norm_sq = 0.0;
    for (const auto& e : w) {
        w_norm_sq += std::norm(e);
    }
    if (w_norm_sq > 1.0 + 2e-9) {
        throw std::invalid_argument("Transmit beamformer exceeds the unit power budget");
    }
    std::complex<double> s(0.0, 0.0); // phi^T g
    for (std::size_t i = 0; i < phase_shifts.size(); ++i) {
        s += phase_shifts[i] * channel.ris_factor[i];
    }
    std::complex<double> t(0.0, 0.0); // a_M^H w
    for (std::size_t j = 0; j < w.size(); ++j) {
        t += std::conj(channel.tx_response[j]) * w[j];
    }
    return gamma_bar * std::norm(s * t);
}

// Maximum received SNR in closed form: M * gamma_bar * (sum |h_i|)^2.
inline double closed_form_snr(const ComplexVector& h, std::size_t m, double gamma_bar) {
    detail::check_count_positive(h.size(), "Fading vector length");
    detail::check_count_positive(m, "Transmit antenna count");
    detail::check_finite(gamma_bar, "Average transmit SNR");
    detail::check_non_negative(gamma_bar, "Average transmit SNR");
    return detail::snr_from_magnitude_sum(detail::magnitude_sum(h), m, gamma_bar);
}

// Full closed-form solution with the achieved SNR evaluated through the
// factored received-SNR path (not the closed form), so the solution is
// self-certifying against closed_form_snr.
inline BeamformingSolution solve_beamforming(const CascadedChannel& channel,
                                             double gamma_bar) {
    BeamformingSolution solution;
    auto [lambda1, u1] = rank1_eigenpair(channel);
    solution.lambda1 = lambda1;
    solution.u1 = std::move(u1);
    solution.phase_shifts = optimal_phase_shifts(solution.u1,
                                                 &solution.degenerate_entries);
    solution.tx_beamformer = optimal_tx_beamformer(solution.phase_shifts, channel);
    solution.snr = received_snr(solution.phase_shifts, solution.tx_beamformer,
                                channel, gamma_bar);
    return solution;
}

// Exhaustive search over the quantized phase lattice (each of the K phases
// ranges over grid_points_per_phase equispaced values on [0, 2*pi)), with
// the matched transmit beamformer applied analytically:
// SNR(phi) = gamma_bar * M * |phi^T g|^2. Ties keep the lexicographically
// smallest lattice point, so the result is partition-independent.
inline BruteForceResult brute_force_phase_search(const CascadedChannel& channel,
                                                 double gamma_bar,
                                                 int grid_points_per_phase) {
    const std::size_t k = channel.ris_factor.size();
    detail::check_count_positive(k, "Surface factor length");
    if (k > 4) {
        throw std::invalid_argument(
            "Brute-force phase search is limited to K <= 4 (combinatorial cost)");
    }
    if (grid_points_per_phase < 8) {
        throw std::invalid_argument("Phase grid needs at least 8 points per phase");
    }
    detail::check_finite(gamma_bar, "Average transmit SNR");
    detail::check_non_negative(gamma_bar, "Average transmit SNR");

    const auto grid = static_cast<std::size_t>(grid_points_per_phase);
    std::vector<std::complex<double>> phase_table(grid);
    for (std::size_t p = 0; p < grid; ++p) {
        phase_table[p] = std::polar(
            1.0, 2.0 * std::numbers::pi * static_cast<double>(p) / static_cast<double>(grid));
    }

    std::vector<std::size_t> best_index(k, 0);
    double best_metric = -1.0; // |phi^T g|^2
    std::vector<std::size_t> index(k, 0);
    std::vector<std::complex<double>> partial(k + 1);
    partial[0] = {0.0, 0.0};

    // Odometer traversal in lexicographic order with partial sums of
    // phi^T g maintained per digit; strict improvement keeps the first
    // (smallest) maximizing lattice point.
    std::size_t level = 0;
    while (true) {
        if (level == k) {
            const double metric = std::norm(partial[k]);
            if (metric > best_metric) {
                best_metric = metric;
                best_index = index;
            }
            // Backtrack to the deepest digit that can still advance.
            std::size_t digit = k;
            while (digit > 0 && index[digit - 1] + 1 == grid) {
                index[digit - 1] = 0;
                --digit;
            }
            if (digit == 0) {
                break;
            }
            ++index[digit - 1];
            level = digit - 1; // partial sums from this digit on are stale
            continue;
        }
        partial[level + 1] =
            partial[level] + phase_table[index[level]] * channel.ris_factor[level];
        ++level;
    }

    BruteForceResult result;
    result.phase_shifts.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        result.phase_shifts[i] = phase_table[best_index[i]];
    }
    result.snr = gamma_bar * static_cast<double>(channel.tx_response.size()) *
                 best_metric;
    return result;
}

} // namespace rismiso

#endif // RISMISO_BEAMFORMING_HPP
