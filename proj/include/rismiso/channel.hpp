#ifndef RISMISO_CHANNEL_HPP
#define RISMISO_CHANNEL_HPP

// Channel construction for the RIS-assisted downlink: square-planar-array
// steering vectors, the deterministic rank-1 line-of-sight link between
// transmitter and surface, Rayleigh fading on the surface-to-user hop, and
// the cascaded end-to-end channel kept in factored (rank-1) form.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "rismiso/errors.hpp"
#include "rismiso/rng.hpp"

namespace rismiso {

using ComplexVector = std::vector<std::complex<double>>;

// Uniform square planar array: element_count must be a perfect square,
// spacing_ratio is the element spacing in carrier wavelengths (d/lambda).
struct UspaGeometry {
    std::size_t element_count = 0;
    double spacing_ratio = 0.0;
};

struct SteeringAngles {
    double azimuth = 0.0;   // radians, stored unwrapped
    double elevation = 0.0; // radians, stored unwrapped
};

// Rank-1 line-of-sight channel held as its two steering factors;
// the dense matrix rx_response * tx_response^H is never materialized
// outside of tests.
struct LosChannel {
    ComplexVector rx_response; // surface side, length K
    ComplexVector tx_response; // transmitter side, length M
};

// Cascaded transmitter -> surface -> user channel diag(h) * (a_K a_M^H),
// stored factored: V = ris_factor * tx_response^H with
// ris_factor = h (elementwise*) a_K. The fading vector is retained so
// oracle checks can rebuild everything from scratch.
struct CascadedChannel {
    ComplexVector ris_factor;  // length K
    ComplexVector tx_response; // length M
    ComplexVector fading;      // length K
};

namespace detail {

inline void validate_geometry(const UspaGeometry& geometry, const char* name) {
    exact_square_side(geometry.element_count, name);
    check_finite(geometry.spacing_ratio, "Element spacing ratio");
    check_positive(geometry.spacing_ratio, "Element spacing ratio");
}

} // namespace detail

// Steering vector of a square planar array: the element at grid position
// (x, y), 0 <= x,y < sqrt(l), contributes the phase
//   2*pi*(d/lambda) * (x*sin(az)*sin(el) + y*cos(el)),
// stored x-major (index = x*sqrt(l) + y). Entry (0,0) is exactly 1.
inline ComplexVector array_response(const UspaGeometry& geometry,
                                    const SteeringAngles& angles) {
    detail::validate_geometry(geometry, "Array element count");
    detail::check_finite(angles.azimuth, "Azimuth angle");
    detail::check_finite(angles.elevation, "Elevation angle");
    const std::size_t side = detail::exact_square_side(geometry.element_count,
                                                       "Array element count");
    const double phase_x = 2.0 * std::numbers::pi * geometry.spacing_ratio *
                           std::sin(angles.azimuth) * std::sin(angles.elevation);
    const double phase_y = 2.0 * std::numbers::pi * geometry.spacing_ratio *
                           std::cos(angles.elevation);
    ComplexVector response(geometry.element_count);
    for (std::size_t x = 0; x < side; ++x) {
        for (std::size_t y = 0; y < side; ++y) {
            const double phase = phase_x * static_cast<double>(x) +
                                 phase_y * static_cast<double>(y);
            response[x * side + y] = std::polar(1.0, phase);
        }
    }
    return response;
}

// Deterministic LoS link: outer product of the surface-side arrival
// response and the transmitter-side departure response, kept factored.
inline LosChannel los_channel(const UspaGeometry& ris_geometry,
                              const SteeringAngles& ris_angles,
                              const UspaGeometry& bs_geometry,
                              const SteeringAngles& bs_angles) {
    return LosChannel{array_response(ris_geometry, ris_angles),
                      array_response(bs_geometry, bs_angles)};
}

// Fills `out` with i.i.d. CN(0,1) fading coefficients drawn from `rng`.
inline void sample_fading_into(std::span<std::complex<double>> out, PhiloxRng& rng) {
    for (auto& h : out) {
        h = rng.complex_normal();
    }
}

// K i.i.d. CN(0,1) fading coefficients (real/imaginary parts N(0, 1/2)).
inline ComplexVector sample_fading(std::size_t k, PhiloxRng& rng) {
    detail::check_count_positive(k, "Fading vector length");
    ComplexVector h(k);
    sample_fading_into(h, rng);
    return h;
}

// Cascaded channel V = diag(h) * (a_K a_M^H) in factored form:
// ris_factor[i] = h[i] * a_K[i], tx_response = a_M.
inline CascadedChannel cascaded_channel(const ComplexVector& h, const LosChannel& los) {
    detail::check_equal_size(h.size(), los.rx_response.size(),
                             "Fading vector vs surface response");
    detail::check_count_positive(h.size(), "Fading vector length");
    detail::check_count_positive(los.tx_response.size(), "Transmit response length");
    CascadedChannel channel;
    channel.ris_factor.resize(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        channel.ris_factor[i] = h[i] * los.rx_response[i];
    }
    channel.tx_response = los.tx_response;
    channel.fading = h;
    return channel;
}

// Dense K x M materializations (row-major), intended for test oracles only.
inline std::vector<ComplexVector> dense_los_matrix(const LosChannel& los) {
    std::vector<ComplexVector> dense(los.rx_response.size(),
                                     ComplexVector(los.tx_response.size()));
    for (std::size_t i = 0; i < los.rx_response.size(); ++i) {
        for (std::size_t j = 0; j < los.tx_response.size(); ++j) {
            dense[i][j] = los.rx_response[i] * std::conj(los.tx_response[j]);
        }
    }
    return dense;
}

inline std::vector<ComplexVector> dense_cascaded_matrix(const CascadedChannel& channel) {
    std::vector<ComplexVector> dense(channel.ris_factor.size(),
                                     ComplexVector(channel.tx_response.size()));
    for (std::size_t i = 0; i < channel.ris_factor.size(); ++i) {
        for (std::size_t j = 0; j < channel.tx_response.size(); ++j) {
            dense[i][j] = channel.ris_factor[i] * std::conj(channel.tx_response[j]);
        }
    }
    return dense;
}

} // namespace rismiso

#endif // RISMISO_CHANNEL_HPP
