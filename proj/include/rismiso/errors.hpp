#ifndef RISMISO_ERRORS_HPP
#define RISMISO_ERRORS_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace rismiso {

// Thrown when a channel realization admits no well-defined beamformer
// (e.g. an all-zero fading vector, where the dominant eigenvector of the
// rank-1 correlation matrix is undefined).
class degenerate_channel_error : public std::domain_error {
public:
    explicit degenerate_channel_error(const std::string& what)
        : std::domain_error(what) {}
};

// Thrown when a self-check (pipeline certification, file round-trip, ...)
// observes a violation of a property the library promises to uphold.
class verification_error : public std::runtime_error {
public:
    explicit verification_error(const std::string& what)
        : std::runtime_error(what) {}
};

namespace detail {

inline void check_finite(double value, const char* name) {
    if (!std::isfinite(value)) {
        throw std::domain_error(std::string(name) + " must be finite");
    }
}

inline void check_positive(double value, const char* name) {
    if (!(value > 0.0)) {
        throw std::domain_error(std::string(name) + " must be positive");
    }
}

inline void check_non_negative(double value, const char* name) {
    if (!(value >= 0.0)) {
        throw std::domain_error(std::string(name) + " cannot be negative");
    }
}

inline void check_count_positive(std::size_t value, const char* name) {
    if (value == 0) {
        throw std::invalid_argument(std::string(name) + " cannot be zero");
    }
}

inline void check_equal_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": size mismatch (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

// Returns the exact integer square root of `value`, rejecting non-squares.
// Square planar arrays require element counts that are perfect squares.
inline std::size_t exact_square_side(std::size_t value, const char* name) {
    check_count_positive(value, name);
    auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(value))));
    // llround can land one off for large inputs; settle it exactly in integers.
    while (side * side > value) --side;
    while ((side + 1) * (side + 1) <= value) ++side;
    if (side * side != value) {
        throw std::invalid_argument(std::string(name) + " must be a perfect square (got " +
                                    std::to_string(value) + ")");
    }
    return side;
}

} // namespace detail
} // namespace rismiso

#endif // RISMISO_ERRORS_HPP
