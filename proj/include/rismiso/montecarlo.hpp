#ifndef RISMISO_MONTECARLO_HPP
#define RISMISO_MONTECARLO_HPP

// Independent simulation oracle: empirical distributions of Y = sum |h_i|
// and of the received SNR, plus Monte-Carlo estimates of outage probability,
// ergodic rate, and average symbol error probability.
//
// Reproducibility contract: every trial owns the counter-based substream
// PhiloxRng(seed, trial), so the sampled values never depend on scheduling.
// Trials are accumulated in fixed-size chunks (sequential Welford inside a
// chunk, chunk combines applied in ascending chunk order afterwards), so the
// floating-point reduction order is a pure function of (seed, trials) and
// every estimate is bit-identical across runs and across worker counts.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rismiso/beamforming.hpp"
#include "rismiso/channel.hpp"
#include "rismiso/errors.hpp"
#include "rismiso/performance.hpp"
#include "rismiso/rng.hpp"
#include "rismiso/specfun.hpp"

namespace rismiso {

struct SimulationConfig {
    std::size_t k_elements = 0;   // surface elements, perfect square
    std::size_t m_antennas = 0;   // transmit antennas, perfect square
    double gamma_bar = 1.0;       // average transmit SNR, linear
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::string scenario_label;
};

// A point estimate with its standard error: sample standard deviation over
// sqrt(trials) for mean-type estimators, the binomial formula
// sqrt(p(1-p)/trials) for the outage fraction.
struct EstimateWithError {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;
};

// End-to-end certification record for the closed-form beamformers: worst
// relative deviation between the explicitly evaluated pipeline SNR and the
// closed form over all draws, with the offending substream index. The
// conjugated phase configuration conj(phi) is evaluated alongside to document
// that the chosen sign of the phase alignment is the maximizing one and not
// an arbitrary convention (the two coincide only at K = 1).
struct PipelineReport {
    std::uint64_t draws = 0;
    double tolerance = 1e-10;
    double max_relative_deviation = 0.0;
    std::uint64_t worst_trial = 0;          // substream index of the max deviation
    double min_conjugate_ratio = 1.0;       // min over draws of snr(conj(phi))/closed
    double max_conjugate_ratio = 0.0;       // max over draws of the same ratio
    bool passed = false;
};

namespace detail {

// Chunk granularity of the deterministic reduction. Small enough to keep
// per-chunk Welford error negligible, large enough that per-chunk overhead
// vanishes; part of the reproducibility contract, so never change it lightly.
inline constexpr std::uint64_t simulation_chunk = 65536;

inline void validate_config(const SimulationConfig& config) {
    exact_square_side(config.k_elements, "Surface element count");
    exact_square_side(config.m_antennas, "Transmit antenna count");
    check_finite(config.gamma_bar, "Average transmit SNR");
    check_positive(config.gamma_bar, "Average transmit SNR");
    check_count_positive(static_cast<std::size_t>(config.trials), "Trial count");
}

inline unsigned resolve_workers(unsigned requested, std::uint64_t chunk_count) {
    unsigned workers = requested != 0 ? requested : std::thread::hardware_concurrency();
    if (workers == 0) {
        workers = 1;
    }
    if (chunk_count < workers) {
        workers = static_cast<unsigned>(chunk_count);
    }
    return std::max(workers, 1u);
}

// Welford running mean/variance with Chan's combine step. Inside a chunk the
// pushes are sequential; combines happen only in the fixed post-pass.
struct WelfordState {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const WelfordState& other) {
        if (other.count == 0) {
            return;
        }
        if (count == 0) {
            *this = other;
            return;
        }
        const double n_a = static_cast<double>(count);
        const double n_b = static_cast<double>(other.count);
        const double total = n_a + n_b;
        const double delta = other.mean - mean;
        mean += delta * (n_b / total);
        m2 += other.m2 + delta * delta * (n_a * n_b / total);
        count += other.count;
    }

    EstimateWithError estimate() const {
        EstimateWithError out;
        out.value = mean;
        out.trials = count;
        if (count >= 2) {
            const double n = static_cast<double>(count);
            out.std_error = std::sqrt(m2 / (n - 1.0) / n);
        }
        return out;
    }
};

// Exact integer tally for indicator estimators; the resulting fraction is a
// single division, so it cannot depend on accumulation order at all.
struct CountState {
    std::uint64_t hits = 0;
    std::uint64_t count = 0;

    void merge(const CountState& other) {
        hits += other.hits;
        count += other.count;
    }

    EstimateWithError estimate() const {
        EstimateWithError out;
        const double n = static_cast<double>(count);
        const double p = static_cast<double>(hits) / n;
        out.value = p;
        out.std_error = std::sqrt(p * (1.0 - p) / n);
        out.trials = count;
        return out;
    }
};

// Shared trial loop: draws Y once per trial and feeds every sweep point,
// so a G-point sweep costs one fading draw plus G kernel evaluations per
// trial. `visit(state, y, point)` pushes the kernel value for that point.
// Chunks are claimed by an atomic counter (any schedule), accumulated
// independently, and combined in ascending chunk index order.
template <typename State, typename Visit>
std::vector<State> chunked_sweep(std::size_t k_elements, std::uint64_t trials,
                                 std::uint64_t seed, std::size_t point_count,
                                 unsigned requested_workers, const Visit& visit) {
    const std::uint64_t chunk_count = (trials + simulation_chunk - 1) / simulation_chunk;
    std::vector<std::vector<State>> chunk_states(
        static_cast<std::size_t>(chunk_count), std::vector<State>(point_count));
    const unsigned workers = resolve_workers(requested_workers, chunk_count);

    std::atomic<std::uint64_t> next_chunk{0};
    const auto run = [&]() {
        for (;;) {
            const std::uint64_t chunk = next_chunk.fetch_add(1, std::memory_order_relaxed);
            if (chunk >= chunk_count) {
                return;
            }
            auto& states = chunk_states[static_cast<std::size_t>(chunk)];
            const std::uint64_t begin = chunk * simulation_chunk;
            const std::uint64_t end = std::min(trials, begin + simulation_chunk);
            for (std::uint64_t trial = begin; trial < end; ++trial) {
                PhiloxRng rng(seed, trial);
                // Same draw order and summation order as
                // closed_form_snr(sample_fading(K, rng), ...), so the two
                // paths agree bit-for-bit.
                double y = 0.0;
                for (std::size_t i = 0; i < k_elements; ++i) {
                    y += std::abs(rng.complex_normal());
                }
                for (std::size_t point = 0; point < point_count; ++point) {
                    visit(states[point], y, point);
                }
            }
        }
    };

    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(run);
        }
        for (auto& thread : pool) {
            thread.join();
        }
    }

    std::vector<State> combined(point_count);
    for (const auto& states : chunk_states) {
        for (std::size_t point = 0; point < point_count; ++point) {
            combined[point].merge(states[point]);
        }
    }
    return combined;
}

inline void validate_sweep(std::span<const double> gamma_bars) {
    if (gamma_bars.empty()) {
        throw std::invalid_argument("Sweep must contain at least one point");
    }
    for (double gamma_bar : gamma_bars) {
        check_finite(gamma_bar, "Sweep average transmit SNR");
        check_positive(gamma_bar, "Sweep average transmit SNR");
    }
}

} // namespace detail

// Outage probability Pr(gamma <= gamma_th) at each sweep SNR, one shared set
// of fading draws across the sweep. Exact hit counts; binomial standard error.
inline std::vector<EstimateWithError> estimate_outage_sweep(
    const SimulationConfig& config, std::span<const double> gamma_bars, double gamma_th,
    unsigned workers = 0) {
    detail::validate_config(config);
    detail::validate_sweep(gamma_bars);
    detail::check_finite(gamma_th, "Outage threshold");
    detail::check_positive(gamma_th, "Outage threshold");
    const std::size_t m = config.m_antennas;
    const auto states = detail::chunked_sweep<detail::CountState>(
        config.k_elements, config.trials, config.seed, gamma_bars.size(), workers,
        [&](detail::CountState& state, double y, std::size_t point) {
            const double snr = detail::snr_from_magnitude_sum(y, m, gamma_bars[point]);
            state.hits += snr <= gamma_th ? 1 : 0;
            ++state.count;
        });
    std::vector<EstimateWithError> estimates(states.size());
    std::transform(states.begin(), states.end(), estimates.begin(),
                   [](const detail::CountState& s) { return s.estimate(); });
    return estimates;
}

// Ergodic rate E[log2(1 + gamma)] at each sweep SNR.
inline std::vector<EstimateWithError> estimate_rate_sweep(
    const SimulationConfig& config, std::span<const double> gamma_bars,
    unsigned workers = 0) {
    detail::validate_config(config);
    detail::validate_sweep(gamma_bars);
    const std::size_t m = config.m_antennas;
    const auto states = detail::chunked_sweep<detail::WelfordState>(
        config.k_elements, config.trials, config.seed, gamma_bars.size(), workers,
        [&](detail::WelfordState& state, double y, std::size_t point) {
            const double snr = detail::snr_from_magnitude_sum(y, m, gamma_bars[point]);
            state.push(std::log1p(snr) / std::numbers::ln2);
        });
    std::vector<EstimateWithError> estimates(states.size());
    std::transform(states.begin(), states.end(), estimates.begin(),
                   [](const detail::WelfordState& s) { return s.estimate(); });
    return estimates;
}

// Average symbol error probability at each sweep SNR, estimated by averaging
// the conditional error alpha*Q(sqrt(beta*gamma)) over channel draws rather
// than simulating symbol decisions: the expectation is identical and the
// variance is orders of magnitude lower, which is what makes 1e-6 error
// rates reachable with ~1e7 channel draws instead of ~1e9 symbols.
inline std::vector<EstimateWithError> estimate_sep_sweep(
    const SimulationConfig& config, std::span<const double> gamma_bars,
    const ModulationParams& modulation, unsigned workers = 0) {
    detail::validate_config(config);
    detail::validate_sweep(gamma_bars);
    detail::check_modulation(modulation);
    const std::size_t m = config.m_antennas;
    const double alpha = modulation.alpha;
    const double beta = modulation.beta;
    const auto states = detail::chunked_sweep<detail::WelfordState>(
        config.k_elements, config.trials, config.seed, gamma_bars.size(), workers,
        [&](detail::WelfordState& state, double y, std::size_t point) {
            const double snr = detail::snr_from_magnitude_sum(y, m, gamma_bars[point]);
            state.push(alpha * q_function(std::sqrt(beta * snr)));
        });
    std::vector<EstimateWithError> estimates(states.size());
    std::transform(states.begin(), states.end(), estimates.begin(),
                   [](const detail::WelfordState& s) { return s.estimate(); });
    return estimates;
}

// Single-point conveniences: one-element sweeps at config.gamma_bar, so a
// standalone estimate is bit-identical to the matching sweep column.
inline EstimateWithError estimate_outage(const SimulationConfig& config, double gamma_th,
                                         unsigned workers = 0) {
    const double point[] = {config.gamma_bar};
    return estimate_outage_sweep(config, point, gamma_th, workers).front();
}

inline EstimateWithError estimate_rate(const SimulationConfig& config, unsigned workers = 0) {
    const double point[] = {config.gamma_bar};
    return estimate_rate_sweep(config, point, workers).front();
}

inline EstimateWithError estimate_sep(const SimulationConfig& config,
                                      const ModulationParams& modulation,
                                      unsigned workers = 0) {
    const double point[] = {config.gamma_bar};
    return estimate_sep_sweep(config, point, modulation, workers).front();
}

// Materialized received-SNR samples, trial index order. Sample `trial` is
// closed_form_snr(sample_fading(K, PhiloxRng(seed, trial)), M, gamma_bar);
// the layout is position-addressed, so parallel filling is trivially exact.
inline std::vector<double> simulate_snr_samples(const SimulationConfig& config,
                                                unsigned workers = 0) {
    detail::validate_config(config);
    std::vector<double> samples(static_cast<std::size_t>(config.trials));
    const std::uint64_t chunk_count =
        (config.trials + detail::simulation_chunk - 1) / detail::simulation_chunk;
    const unsigned worker_count = detail::resolve_workers(workers, chunk_count);

    std::atomic<std::uint64_t> next_chunk{0};
    const auto run = [&]() {
        for (;;) {
            const std::uint64_t chunk = next_chunk.fetch_add(1, std::memory_order_relaxed);
            if (chunk >= chunk_count) {
                return;
            }
            const std::uint64_t begin = chunk * detail::simulation_chunk;
            const std::uint64_t end = std::min(config.trials, begin + detail::simulation_chunk);
            for (std::uint64_t trial = begin; trial < end; ++trial) {
                PhiloxRng rng(config.seed, trial);
                double y = 0.0;
                for (std::size_t i = 0; i < config.k_elements; ++i) {
                    y += std::abs(rng.complex_normal());
                }
                samples[static_cast<std::size_t>(trial)] =
                    detail::snr_from_magnitude_sum(y, config.m_antennas, config.gamma_bar);
            }
        }
    };
    if (worker_count == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(worker_count);
        for (unsigned w = 0; w < worker_count; ++w) {
            pool.emplace_back(run);
        }
        for (auto& thread : pool) {
            thread.join();
        }
    }
    return samples;
}

// Empirical CDF of Y on a sorted grid: fraction of draws with Y <= grid[j].
// Implemented as exact per-cell tallies (lower_bound bucketing) followed by
// one prefix sum, so worker count cannot perturb the result.
inline std::vector<double> empirical_cdf_y(std::size_t k_elements, std::uint64_t trials,
                                           std::uint64_t seed, std::span<const double> grid,
                                           unsigned workers = 0) {
    detail::check_count_positive(k_elements, "Surface element count");
    detail::check_count_positive(static_cast<std::size_t>(trials), "Trial count");
    if (grid.empty()) {
        throw std::invalid_argument("CDF grid must contain at least one point");
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
        detail::check_finite(grid[j], "CDF grid point");
        if (j > 0 && !(grid[j] >= grid[j - 1])) {
            throw std::domain_error("CDF grid must be sorted ascending");
        }
    }

    // states[point] tallies draws that land in (grid[point-1], grid[point]];
    // the trailing cell catches draws above the grid. A plain uint64 per cell
    // would do, but reusing the sweep engine keeps one traversal code path.
    const auto states = detail::chunked_sweep<detail::CountState>(
        k_elements, trials, seed, grid.size() + 1, workers,
        [&](detail::CountState& state, double y, std::size_t point) {
            const std::size_t cell = static_cast<std::size_t>(
                std::lower_bound(grid.begin(), grid.end(), y) - grid.begin());
            state.hits += cell == point ? 1 : 0;
            ++state.count;
        });

    std::vector<double> cdf(grid.size());
    std::uint64_t below = 0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        below += states[j].hits;
        cdf[j] = static_cast<double>(below) / static_cast<double>(trials);
    }
    return cdf;
}

// Runs the full receive-chain construction for every draw — fading, cascaded
// channel, dominant eigenpair, phase alignment, matched transmit beamformer,
// explicitly evaluated received SNR — and compares against the closed form.
// The surface/array geometry uses the standard experiment preset (azimuth =
// elevation = pi/4 on both hops, half-wavelength spacing); the closed-form
// identity is geometry-independent, so the preset is representative.
inline PipelineReport verify_beamforming_pipeline(const SimulationConfig& config,
                                                  std::uint64_t draws,
                                                  unsigned workers = 0) {
    detail::validate_config(config);
    detail::check_count_positive(static_cast<std::size_t>(draws), "Draw count");

    const UspaGeometry ris_geometry{config.k_elements, 0.5};
    const UspaGeometry bs_geometry{config.m_antennas, 0.5};
    const SteeringAngles angles{std::numbers::pi / 4.0, std::numbers::pi / 4.0};
    const LosChannel los = los_channel(ris_geometry, angles, bs_geometry, angles);

    struct DrawRecord {
        double max_deviation = -1.0;
        std::uint64_t worst_trial = 0;
        double min_ratio = std::numeric_limits<double>::infinity();
        double max_ratio = -std::numeric_limits<double>::infinity();
        std::uint64_t draws = 0;

        void merge(const DrawRecord& other) {
            if (other.max_deviation > max_deviation) {
                max_deviation = other.max_deviation;
                worst_trial = other.worst_trial;
            }
            min_ratio = std::min(min_ratio, other.min_ratio);
            max_ratio = std::max(max_ratio, other.max_ratio);
            draws += other.draws;
        }
    };

    const std::uint64_t chunk_count =
        (draws + detail::simulation_chunk - 1) / detail::simulation_chunk;
    std::vector<DrawRecord> chunk_records(static_cast<std::size_t>(chunk_count));
    const unsigned worker_count = detail::resolve_workers(workers, chunk_count);

    std::atomic<std::uint64_t> next_chunk{0};
    const auto run = [&]() {
        for (;;) {
            const std::uint64_t chunk = next_chunk.fetch_add(1, std::memory_order_relaxed);
            if (chunk >= chunk_count) {
                return;
            }
            DrawRecord& record = chunk_records[static_cast<std::size_t>(chunk)];
            const std::uint64_t begin = chunk * detail::simulation_chunk;
            const std::uint64_t end = std::min(draws, begin + detail::simulation_chunk);
            for (std::uint64_t trial = begin; trial < end; ++trial) {
                PhiloxRng rng(config.seed, trial);
                const ComplexVector h = sample_fading(config.k_elements, rng);
                const CascadedChannel channel = cascaded_channel(h, los);
                const BeamformingSolution solution =
                    solve_beamforming(channel, config.gamma_bar);
                const double closed =
                    closed_form_snr(h, config.m_antennas, config.gamma_bar);

                const double deviation = std::abs(solution.snr - closed) / closed;
                if (deviation > record.max_deviation) {
                    record.max_deviation = deviation;
                    record.worst_trial = trial;
                }

                ComplexVector conjugated(solution.phase_shifts.size());
                std::transform(solution.phase_shifts.begin(), solution.phase_shifts.end(),
                               conjugated.begin(),
                               [](std::complex<double> phi) { return std::conj(phi); });
                const ComplexVector w_conjugated =
                    optimal_tx_beamformer(conjugated, channel);
                const double conjugate_snr =
                    received_snr(conjugated, w_conjugated, channel, config.gamma_bar);
                const double ratio = conjugate_snr / closed;
                record.min_ratio = std::min(record.min_ratio, ratio);
                record.max_ratio = std::max(record.max_ratio, ratio);
                ++record.draws;
            }
        }
    };
    if (worker_count == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(worker_count);
        for (unsigned w = 0; w < worker_count; ++w) {
            pool.emplace_back(run);
        }
        for (auto& thread : pool) {
            thread.join();
        }
    }

    DrawRecord total;
    for (const auto& record : chunk_records) {
        total.merge(record);
    }

    PipelineReport report;
    report.draws = total.draws;
    report.max_relative_deviation = std::max(total.max_deviation, 0.0);
    report.worst_trial = total.worst_trial;
    report.min_conjugate_ratio = total.min_ratio;
    report.max_conjugate_ratio = total.max_ratio;
    report.passed = report.max_relative_deviation <= report.tolerance;
    return report;
}

} // namespace rismiso

#endif // RISMISO_MONTECARLO_HPP
