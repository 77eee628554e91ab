#ifndef RISMISO_EXPERIMENT_HPP
#define RISMISO_EXPERIMENT_HPP

// Experiment layer behind the command-line runner: a fully resolved
// experiment description, preset expansion and validation of raw inputs,
// the sweep drivers that pair Monte-Carlo estimates with their analytic
// counterparts, and CSV/JSON writers/readers with full round-trip fidelity
// (17 significant digits, so every double survives a write/read cycle).
//
// Reruns of the same resolved spec produce byte-identical files apart from
// the timestamp metadata line, regardless of worker count.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "rismiso/beamforming.hpp"
#include "rismiso/channel.hpp"
#include "rismiso/errors.hpp"
#include "rismiso/montecarlo.hpp"
#include "rismiso/performance.hpp"
#include "rismiso/rng.hpp"
#include "rismiso/snr_statistics.hpp"

namespace rismiso {

inline constexpr const char* artifact_name = "rismiso";
inline constexpr const char* artifact_version = "1.0.0";

enum class ExperimentCommand { dist, outage, rate, sep, verify };
enum class OutputFormat { csv, json };

// Average-SNR sweep in dB; rows are emitted in ascending dB order.
struct SweepSpec {
    double start_db = 0.0;
    double stop_db = 0.0;
    std::size_t points = 0;

    bool operator==(const SweepSpec&) const = default;
};

// A fully resolved experiment: presets expanded, defaults applied. Worker
// count is deliberately not a field here — it may never influence the
// numbers, so it travels as a separate run-time argument.
struct ExperimentSpec {
    ExperimentCommand command = ExperimentCommand::dist;
    std::string scenario;       // case1 | case2 | case3 | custom
    std::size_t k_elements = 0; // surface elements, perfect square
    std::size_t m_antennas = 0; // transmit antennas, perfect square
    SweepSpec sweep;            // outage/rate/sep only
    double gamma_th_db = 10.0;  // outage only
    ModulationParams modulation = bpsk_modulation(); // sep only
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::string output_path;
    OutputFormat format = OutputFormat::csv;
};

inline bool operator==(const ModulationParams& a, const ModulationParams& b) {
    return a.alpha == b.alpha && a.beta == b.beta && a.name == b.name;
}

inline bool operator==(const ExperimentSpec& a, const ExperimentSpec& b) {
    return a.command == b.command && a.scenario == b.scenario &&
           a.k_elements == b.k_elements && a.m_antennas == b.m_antennas &&
           a.sweep == b.sweep && a.gamma_th_db == b.gamma_th_db &&
           a.modulation == b.modulation && a.trials == b.trials &&
           a.seed == b.seed && a.output_path == b.output_path &&
           a.format == b.format;
}

// Raw command-line inputs before preset expansion. A field is only set when
// the user supplied it, so misapplied options can be rejected precisely.
struct RawExperimentInput {
    std::string command;
    std::string scenario;
    std::optional<std::size_t> k_elements;
    std::optional<std::size_t> m_antennas;
    std::optional<std::string> sweep;      // "START_DB:STOP_DB:POINTS"
    std::optional<double> gamma_th_db;
    std::optional<std::string> modulation; // bpsk | qpsk | custom:ALPHA,BETA
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_path;
    std::optional<std::string> format;     // csv | json
};

// Tabular experiment output. Numeric-only commands leave row_labels empty;
// the verify command labels each check row, and the numeric cells then hold
// the observed value, its bound, and a 0/1 pass flag.
struct ExperimentResult {
    ExperimentSpec spec;
    std::string version;
    std::string timestamp; // ISO 8601 UTC; the only non-reproducible field
    std::vector<std::string> columns;
    std::vector<std::string> row_labels;
    std::vector<std::vector<double>> rows;
};

inline bool operator==(const ExperimentResult& a, const ExperimentResult& b) {
    return a.spec == b.spec && a.version == b.version && a.timestamp == b.timestamp &&
           a.columns == b.columns && a.row_labels == b.row_labels && a.rows == b.rows;
}

namespace detail {

inline std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

inline double parse_double(const std::string& text, const std::string& what) {
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') {
        throw std::invalid_argument(what + " is not a number: '" + text + "'");
    }
    return value;
}

inline std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    char* end = nullptr;
    const unsigned long long value = std::strtoull(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0') {
        throw std::invalid_argument(what + " is not a non-negative integer: '" + text + "'");
    }
    return value;
}

inline std::string utc_timestamp() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm split{};
    gmtime_r(&now, &split);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &split);
    return buffer;
}

} // namespace detail

inline const char* command_name(ExperimentCommand command) {
    switch (command) {
        case ExperimentCommand::dist: return "dist";
        case ExperimentCommand::outage: return "outage";
        case ExperimentCommand::rate: return "rate";
        case ExperimentCommand::sep: return "sep";
        case ExperimentCommand::verify: return "verify";
    }
    throw std::logic_error("Unhandled experiment command");
}

inline ExperimentCommand parse_command(const std::string& name) {
    if (name == "dist") return ExperimentCommand::dist;
    if (name == "outage") return ExperimentCommand::outage;
    if (name == "rate") return ExperimentCommand::rate;
    if (name == "sep") return ExperimentCommand::sep;
    if (name == "verify") return ExperimentCommand::verify;
    throw std::invalid_argument("Unknown command '" + name +
                                "' (expected dist|outage|rate|sep|verify)");
}

inline const char* format_name(OutputFormat format) {
    return format == OutputFormat::csv ? "csv" : "json";
}

inline OutputFormat parse_format(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw std::invalid_argument("Unknown format '" + name + "' (expected csv|json)");
}

inline std::string modulation_token(const ModulationParams& modulation) {
    if (modulation.name == "bpsk" || modulation.name == "qpsk") {
        return modulation.name;
    }
    return "custom:" + detail::format_double(modulation.alpha) + "," +
           detail::format_double(modulation.beta);
}

inline ModulationParams parse_modulation(const std::string& token) {
    if (token == "bpsk") return bpsk_modulation();
    if (token == "qpsk") return qpsk_modulation();
    const std::string prefix = "custom:";
    if (token.rfind(prefix, 0) == 0) {
        const std::string payload = token.substr(prefix.size());
        const std::size_t comma = payload.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument(
                "Custom modulation must be custom:ALPHA,BETA (got '" + token + "')");
        }
        ModulationParams modulation{
            detail::parse_double(payload.substr(0, comma), "Modulation alpha"),
            detail::parse_double(payload.substr(comma + 1), "Modulation beta"),
            "custom"};
        detail::check_modulation(modulation);
        return modulation;
    }
    throw std::invalid_argument("Unknown modulation '" + token +
                                "' (expected bpsk|qpsk|custom:ALPHA,BETA)");
}

inline SweepSpec parse_sweep(const std::string& token) {
    const std::size_t first = token.find(':');
    const std::size_t second = first == std::string::npos
                                   ? std::string::npos
                                   : token.find(':', first + 1);
    if (first == std::string::npos || second == std::string::npos ||
        token.find(':', second + 1) != std::string::npos) {
        throw std::invalid_argument("Sweep must be START_DB:STOP_DB:POINTS (got '" +
                                    token + "')");
    }
    SweepSpec sweep;
    sweep.start_db = detail::parse_double(token.substr(0, first), "Sweep start");
    sweep.stop_db =
        detail::parse_double(token.substr(first + 1, second - first - 1), "Sweep stop");
    sweep.points = static_cast<std::size_t>(
        detail::parse_u64(token.substr(second + 1), "Sweep point count"));
    return sweep;
}

namespace detail {

inline void validate_sweep_spec(const SweepSpec& sweep) {
    check_finite(sweep.start_db, "Sweep start (dB)");
    check_finite(sweep.stop_db, "Sweep stop (dB)");
    if (sweep.points < 2) {
        throw std::invalid_argument("Sweep needs at least 2 points");
    }
    if (!(sweep.start_db < sweep.stop_db)) {
        throw std::invalid_argument("Sweep start (dB) must be below sweep stop (dB)");
    }
}

inline SweepSpec default_sweep(ExperimentCommand command) {
    // Chosen to cover the interesting range of each quantity for the preset
    // scenarios: outage from ~1 down through the deep tail, rate from the
    // noise-limited to the strongly SNR-limited regime, SEP from near the
    // zero-SNR floor down to ~1e-6. Echoed in metadata with every run.
    switch (command) {
        case ExperimentCommand::outage: return {-32.0, -14.0, 10};
        case ExperimentCommand::rate: return {-10.0, 30.0, 9};
        case ExperimentCommand::sep: return {-36.0, -12.0, 13};
        default: return {0.0, 0.0, 0};
    }
}

inline std::uint64_t default_trials(ExperimentCommand command) {
    switch (command) {
        case ExperimentCommand::dist: return 1000000;   // distribution fit
        case ExperimentCommand::rate: return 1000000;   // mean estimate
        case ExperimentCommand::outage: return 10000000; // tail resolution
        case ExperimentCommand::sep: return 10000000;    // tail resolution
        case ExperimentCommand::verify: return 1000;     // certification draws
    }
    throw std::logic_error("Unhandled experiment command");
}

} // namespace detail

// Expands presets, applies documented defaults, and rejects misapplied or
// malformed inputs with messages that name the offending field.
inline ExperimentSpec validate_spec(const RawExperimentInput& raw) {
    ExperimentSpec spec;
    spec.command = parse_command(raw.command);

    const bool sweepable = spec.command == ExperimentCommand::outage ||
                           spec.command == ExperimentCommand::rate ||
                           spec.command == ExperimentCommand::sep;

    spec.scenario = raw.scenario;
    if (raw.scenario == "case1") {
        spec.m_antennas = 16;
        spec.k_elements = 16;
    } else if (raw.scenario == "case2") {
        spec.m_antennas = 36;
        spec.k_elements = 16;
    } else if (raw.scenario == "case3") {
        spec.m_antennas = 16;
        spec.k_elements = 36;
    } else if (raw.scenario == "custom") {
        if (!raw.k_elements || !raw.m_antennas) {
            throw std::invalid_argument(
                "The custom scenario requires both --k and --m");
        }
        spec.k_elements = *raw.k_elements;
        spec.m_antennas = *raw.m_antennas;
    } else {
        throw std::invalid_argument("Unknown scenario '" + raw.scenario +
                                    "' (expected case1|case2|case3|custom)");
    }
    if (raw.scenario != "custom" && (raw.k_elements || raw.m_antennas)) {
        throw std::invalid_argument(
            "--k/--m apply only to the custom scenario; presets fix both");
    }
    detail::exact_square_side(spec.k_elements, "k (surface element count)");
    detail::exact_square_side(spec.m_antennas, "m (transmit antenna count)");

    if (raw.sweep) {
        if (!sweepable) {
            throw std::invalid_argument("--sweep applies only to outage|rate|sep");
        }
        spec.sweep = parse_sweep(*raw.sweep);
    } else {
        spec.sweep = detail::default_sweep(spec.command);
    }
    if (sweepable) {
        detail::validate_sweep_spec(spec.sweep);
    }

    if (raw.gamma_th_db) {
        if (spec.command != ExperimentCommand::outage) {
            throw std::invalid_argument("--gamma-th-db applies only to outage");
        }
        detail::check_finite(*raw.gamma_th_db, "Outage threshold (dB)");
        spec.gamma_th_db = *raw.gamma_th_db;
    }

    if (raw.modulation) {
        if (spec.command != ExperimentCommand::sep) {
            throw std::invalid_argument("--modulation applies only to sep");
        }
        spec.modulation = parse_modulation(*raw.modulation);
    }

    spec.trials = raw.trials ? *raw.trials : detail::default_trials(spec.command);
    if (spec.trials == 0) {
        throw std::invalid_argument("Trial count must be positive");
    }
    spec.seed = raw.seed ? *raw.seed : 0;

    spec.format = raw.format ? parse_format(*raw.format) : OutputFormat::csv;
    if (raw.output_path) {
        spec.output_path = *raw.output_path;
    } else {
        spec.output_path = std::string(command_name(spec.command)) + "_" +
                           spec.scenario + "." + format_name(spec.format);
    }
    return spec;
}

namespace detail {

inline std::vector<double> sweep_db_grid(const SweepSpec& sweep) {
    std::vector<double> grid(sweep.points);
    const double step =
        (sweep.stop_db - sweep.start_db) / static_cast<double>(sweep.points - 1);
    for (std::size_t i = 0; i < sweep.points; ++i) {
        grid[i] = sweep.start_db + step * static_cast<double>(i);
    }
    grid.back() = sweep.stop_db; // land exactly on the requested endpoint
    return grid;
}

inline std::vector<double> to_linear(const std::vector<double>& db_grid) {
    std::vector<double> linear(db_grid.size());
    for (std::size_t i = 0; i < db_grid.size(); ++i) {
        linear[i] = std::pow(10.0, db_grid[i] / 10.0);
    }
    return linear;
}

inline SimulationConfig simulation_config(const ExperimentSpec& spec) {
    SimulationConfig config;
    config.k_elements = spec.k_elements;
    config.m_antennas = spec.m_antennas;
    config.gamma_bar = 1.0; // sweeps supply their own grid
    config.trials = spec.trials;
    config.seed = spec.seed;
    config.scenario_label = spec.scenario;
    return config;
}

inline void require_finite_cells(const std::vector<std::vector<double>>& rows) {
    for (const auto& row : rows) {
        for (double cell : row) {
            if (!std::isfinite(cell)) {
                throw std::runtime_error(
                    "Internal error: non-finite cell in experiment output");
            }
        }
    }
}

// Verify-command oracle: random tiny surfaces with unit-modulus responses,
// solved exactly by lattice enumeration. The rounding argument gives the
// airtight slack bound: some lattice point sits within half a grid step of
// the aligned optimum in every coordinate, so the best lattice SNR is at
// least cos^2(pi/grid) of the closed form, i.e. relative slack at most
// sin^2(pi/grid).
struct BruteForceCheck {
    double max_overshoot = 0.0; // max (brute - closed)/closed; must be ~0
    double max_slack = 0.0;     // max (closed - brute)/closed
    double slack_bound = 0.0;   // sin^2(pi/grid)
};

inline BruteForceCheck brute_force_check(std::size_t k, int grid, std::uint64_t seed,
                                         int draws) {
    BruteForceCheck check;
    const double sin_half = std::sin(std::numbers::pi / static_cast<double>(grid));
    check.slack_bound = sin_half * sin_half;
    for (int draw = 0; draw < draws; ++draw) {
        // Substream indices far above any trial index used by estimators.
        PhiloxRng rng(seed, (std::uint64_t{1} << 32) +
                                static_cast<std::uint64_t>(draw) * 7 + k);
        LosChannel los;
        los.rx_response.resize(k);
        for (auto& entry : los.rx_response) {
            entry = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform01());
        }
        const std::size_t m = draw % 2 == 0 ? 1 : 4;
        los.tx_response.resize(m);
        for (auto& entry : los.tx_response) {
            entry = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform01());
        }
        const ComplexVector h = sample_fading(k, rng);
        const CascadedChannel channel = cascaded_channel(h, los);

        const BruteForceResult brute = brute_force_phase_search(channel, 1.0, grid);
        const double closed = closed_form_snr(h, m, 1.0);
        check.max_overshoot = std::max(check.max_overshoot, (brute.snr - closed) / closed);
        check.max_slack = std::max(check.max_slack, (closed - brute.snr) / closed);
    }
    return check;
}

} // namespace detail

// Runs the experiment described by `spec` and assembles the result table.
// Worker count may change the wall-clock time only, never a single bit of
// the numbers; it is therefore not recorded in the result.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned workers = 0) {
    ExperimentResult result;
    result.spec = spec;
    result.version = artifact_version;
    result.timestamp = detail::utc_timestamp();

    const SimulationConfig config = detail::simulation_config(spec);

    switch (spec.command) {
        case ExperimentCommand::dist: {
            const CltModel clt = clt_model(spec.k_elements);
            const GammaModel gamma = gamma_model(spec.k_elements);
            const std::size_t points = 201;
            const double lo = std::max(clt.mu_y - 5.0 * clt.sigma_y, 1e-9);
            const double hi = clt.mu_y + 5.0 * clt.sigma_y;
            std::vector<double> grid(points);
            for (std::size_t i = 0; i < points; ++i) {
                grid[i] = lo + (hi - lo) * static_cast<double>(i) /
                                   static_cast<double>(points - 1);
            }
            const std::vector<double> empirical =
                empirical_cdf_y(spec.k_elements, spec.trials, spec.seed, grid, workers);
            result.columns = {"y",       "empirical_cdf", "clt_cdf",
                              "gamma_cdf", "clt_pdf",     "gamma_pdf"};
            result.rows.reserve(points);
            for (std::size_t i = 0; i < points; ++i) {
                result.rows.push_back({grid[i], empirical[i], clt_cdf_y(grid[i], clt),
                                       gamma_cdf_y(grid[i], gamma),
                                       clt_pdf_y(grid[i], clt),
                                       gamma_pdf_y(grid[i], gamma)});
            }
            break;
        }
        case ExperimentCommand::outage: {
            const std::vector<double> db_grid = detail::sweep_db_grid(spec.sweep);
            const std::vector<double> gamma_bars = detail::to_linear(db_grid);
            const double gamma_th = std::pow(10.0, spec.gamma_th_db / 10.0);
            const auto mc = estimate_outage_sweep(config, gamma_bars, gamma_th, workers);
            result.columns = {"gamma_bar_db",     "mc_outage",
                              "mc_std_error",     "outage_clt",
                              "outage_gamma",     "outage_asymptotic_raw",
                              "outage_asymptotic"};
            for (std::size_t i = 0; i < gamma_bars.size(); ++i) {
                const double raw = asymptotic_outage(gamma_th, gamma_bars[i],
                                                     spec.m_antennas, spec.k_elements);
                result.rows.push_back(
                    {db_grid[i], mc[i].value, mc[i].std_error,
                     outage_probability(gamma_th, spec.k_elements, spec.m_antennas,
                                        gamma_bars[i], SnrModel::clt),
                     outage_probability(gamma_th, spec.k_elements, spec.m_antennas,
                                        gamma_bars[i], SnrModel::gamma),
                     raw, std::min(raw, 1.0)});
            }
            break;
        }
        case ExperimentCommand::rate: {
            const std::vector<double> db_grid = detail::sweep_db_grid(spec.sweep);
            const std::vector<double> gamma_bars = detail::to_linear(db_grid);
            const auto mc = estimate_rate_sweep(config, gamma_bars, workers);
            result.columns = {"gamma_bar_db", "mc_rate", "mc_std_error", "rate_bound"};
            for (std::size_t i = 0; i < gamma_bars.size(); ++i) {
                result.rows.push_back(
                    {db_grid[i], mc[i].value, mc[i].std_error,
                     rate_upper_bound(spec.m_antennas, spec.k_elements, gamma_bars[i])});
            }
            break;
        }
        case ExperimentCommand::sep: {
            const std::vector<double> db_grid = detail::sweep_db_grid(spec.sweep);
            const std::vector<double> gamma_bars = detail::to_linear(db_grid);
            const auto mc = estimate_sep_sweep(config, gamma_bars, spec.modulation, workers);
            const QuadratureRule rule = gauss_legendre(64);
            result.columns = {"gamma_bar_db", "mc_sep", "mc_std_error", "sep_exact",
                              "sep_upper_bound"};
            for (std::size_t i = 0; i < gamma_bars.size(); ++i) {
                result.rows.push_back(
                    {db_grid[i], mc[i].value, mc[i].std_error,
                     sep_exact(spec.modulation, spec.m_antennas, spec.k_elements,
                               gamma_bars[i], rule),
                     sep_upper_bound(spec.modulation, spec.m_antennas, spec.k_elements,
                                     gamma_bars[i])});
            }
            break;
        }
        case ExperimentCommand::verify: {
            const PipelineReport report =
                verify_beamforming_pipeline(config, spec.trials, workers);
            const auto tiny2 = detail::brute_force_check(2, 256, spec.seed, 4);
            const auto tiny3 = detail::brute_force_check(3, 128, spec.seed, 4);

            result.columns = {"check", "observed", "bound", "passed"};
            const auto add_row = [&result](const std::string& label, double observed,
                                           double bound) {
                result.row_labels.push_back(label);
                result.rows.push_back(
                    {observed, bound, observed <= bound ? 1.0 : 0.0});
            };
            add_row("pipeline_max_relative_deviation", report.max_relative_deviation,
                    report.tolerance);
            add_row("conjugate_alignment_max_snr_ratio", report.max_conjugate_ratio,
                    1.0 + 1e-9);
            add_row("brute_force_overshoot", std::max(tiny2.max_overshoot,
                                                      tiny3.max_overshoot),
                    1e-12);
            add_row("brute_force_slack_k2_grid256", tiny2.max_slack, tiny2.slack_bound);
            add_row("brute_force_slack_k3_grid128", tiny3.max_slack, tiny3.slack_bound);
            break;
        }
    }

    detail::require_finite_cells(result.rows);
    return result;
}

inline bool all_checks_passed(const ExperimentResult& result) {
    if (result.row_labels.empty()) {
        return true;
    }
    for (const auto& row : result.rows) {
        if (row.empty() || row.back() != 1.0) {
            return false;
        }
    }
    return true;
}

namespace detail {

// The metadata block is a flat ordered key/value list; the order below is
// also the emission order, so identical specs serialize identically.
inline std::vector<std::pair<std::string, std::string>> metadata_of(
    const ExperimentResult& result) {
    const ExperimentSpec& spec = result.spec;
    std::vector<std::pair<std::string, std::string>> meta;
    meta.emplace_back("artifact", artifact_name);
    meta.emplace_back("version", result.version);
    meta.emplace_back("timestamp", result.timestamp);
    meta.emplace_back("command", command_name(spec.command));
    meta.emplace_back("scenario", spec.scenario);
    meta.emplace_back("k_elements", std::to_string(spec.k_elements));
    meta.emplace_back("m_antennas", std::to_string(spec.m_antennas));
    const bool sweepable = spec.command == ExperimentCommand::outage ||
                           spec.command == ExperimentCommand::rate ||
                           spec.command == ExperimentCommand::sep;
    if (sweepable) {
        meta.emplace_back("sweep_start_db", format_double(spec.sweep.start_db));
        meta.emplace_back("sweep_stop_db", format_double(spec.sweep.stop_db));
        meta.emplace_back("sweep_points", std::to_string(spec.sweep.points));
    }
    if (spec.command == ExperimentCommand::outage) {
        meta.emplace_back("gamma_th_db", format_double(spec.gamma_th_db));
    }
    if (spec.command == ExperimentCommand::sep) {
        meta.emplace_back("modulation", modulation_token(spec.modulation));
        meta.emplace_back("modulation_alpha", format_double(spec.modulation.alpha));
        meta.emplace_back("modulation_beta", format_double(spec.modulation.beta));
    }
    meta.emplace_back("trials", std::to_string(spec.trials));
    meta.emplace_back("seed", std::to_string(spec.seed));
    meta.emplace_back("output_path", spec.output_path);
    meta.emplace_back("format", format_name(spec.format));
    return meta;
}

inline ExperimentResult result_from_metadata(
    const std::map<std::string, std::string>& meta) {
    const auto require = [&meta](const std::string& key) -> const std::string& {
        const auto it = meta.find(key);
        if (it == meta.end()) {
            throw std::runtime_error("Result file is missing metadata key '" + key + "'");
        }
        return it->second;
    };

    ExperimentResult result;
    result.version = require("version");
    result.timestamp = require("timestamp");

    ExperimentSpec spec;
    spec.command = parse_command(require("command"));
    spec.scenario = require("scenario");
    spec.k_elements = static_cast<std::size_t>(parse_u64(require("k_elements"), "k_elements"));
    spec.m_antennas = static_cast<std::size_t>(parse_u64(require("m_antennas"), "m_antennas"));
    const bool sweepable = spec.command == ExperimentCommand::outage ||
                           spec.command == ExperimentCommand::rate ||
                           spec.command == ExperimentCommand::sep;
    if (sweepable) {
        spec.sweep.start_db = parse_double(require("sweep_start_db"), "sweep_start_db");
        spec.sweep.stop_db = parse_double(require("sweep_stop_db"), "sweep_stop_db");
        spec.sweep.points =
            static_cast<std::size_t>(parse_u64(require("sweep_points"), "sweep_points"));
    }
    if (spec.command == ExperimentCommand::outage) {
        spec.gamma_th_db = parse_double(require("gamma_th_db"), "gamma_th_db");
    }
    if (spec.command == ExperimentCommand::sep) {
        spec.modulation = parse_modulation(require("modulation"));
    }
    spec.trials = parse_u64(require("trials"), "trials");
    spec.seed = parse_u64(require("seed"), "seed");
    spec.output_path = require("output_path");
    spec.format = parse_format(require("format"));
    result.spec = spec;
    return result;
}

} // namespace detail

// CSV: '#'-prefixed metadata preamble, a header row, then one row per sweep
// point (or check), every number at 17 significant digits. LF line endings.
inline void write_result_csv(const ExperimentResult& result, std::ostream& out) {
    for (const auto& [key, value] : detail::metadata_of(result)) {
        out << "# " << key << " = " << value << "\n";
    }
    for (std::size_t c = 0; c < result.columns.size(); ++c) {
        out << (c == 0 ? "" : ",") << result.columns[c];
    }
    out << "\n";
    for (std::size_t r = 0; r < result.rows.size(); ++r) {
        bool first = true;
        if (!result.row_labels.empty()) {
            out << result.row_labels[r];
            first = false;
        }
        for (double cell : result.rows[r]) {
            out << (first ? "" : ",") << detail::format_double(cell);
            first = false;
        }
        out << "\n";
    }
}

inline ExperimentResult read_result_csv(std::istream& in) {
    std::map<std::string, std::string> meta;
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            const std::size_t eq = line.find(" = ");
            if (eq == std::string::npos) {
                throw std::runtime_error("Malformed metadata line: '" + line + "'");
            }
            meta[line.substr(2, eq - 2)] = line.substr(eq + 3);
            continue;
        }
        // First non-metadata line is the header.
        std::stringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            header.push_back(cell);
        }
        break;
    }
    if (header.empty()) {
        throw std::runtime_error("Result file has no header row");
    }

    ExperimentResult result = detail::result_from_metadata(meta);
    result.columns = header;
    const bool labeled = header.front() == "check";
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream cells(line);
        std::string cell;
        std::vector<double> row;
        bool first = true;
        while (std::getline(cells, cell, ',')) {
            if (first && labeled) {
                result.row_labels.push_back(cell);
            } else {
                row.push_back(detail::parse_double(cell, "CSV cell"));
            }
            first = false;
        }
        if (row.size() + (labeled ? 1 : 0) != header.size()) {
            throw std::runtime_error("CSV row width does not match the header");
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

// JSON mirrors the CSV content: the same metadata keys plus the table.
inline void write_result_json(const ExperimentResult& result, std::ostream& out) {
    nlohmann::ordered_json doc;
    for (const auto& [key, value] : detail::metadata_of(result)) {
        doc["metadata"][key] = value;
    }
    doc["columns"] = result.columns;
    if (!result.row_labels.empty()) {
        doc["row_labels"] = result.row_labels;
    }
    doc["rows"] = result.rows;
    out << doc.dump(2) << "\n";
}

inline ExperimentResult read_result_json(std::istream& in) {
    nlohmann::ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& error) {
        throw std::runtime_error(std::string("Cannot parse JSON result: ") +
                                 error.what());
    }
    std::map<std::string, std::string> meta;
    for (const auto& [key, value] : doc.at("metadata").items()) {
        meta[key] = value.get<std::string>();
    }
    ExperimentResult result = detail::result_from_metadata(meta);
    result.columns = doc.at("columns").get<std::vector<std::string>>();
    if (doc.contains("row_labels")) {
        result.row_labels = doc.at("row_labels").get<std::vector<std::string>>();
    }
    result.rows = doc.at("rows").get<std::vector<std::vector<double>>>();
    return result;
}

// Writes the result to its spec's output path in the spec's format.
inline void write_result_file(const ExperimentResult& result) {
    std::ofstream out(result.spec.output_path);
    if (!out) {
        throw std::runtime_error("Cannot open output path '" +
                                 result.spec.output_path + "' for writing");
    }
    if (result.spec.format == OutputFormat::csv) {
        write_result_csv(result, out);
    } else {
        write_result_json(result, out);
    }
    out.flush();
    if (!out) {
        throw std::runtime_error("Write to '" + result.spec.output_path + "' failed");
    }
}

inline ExperimentResult read_result_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("Cannot open result file '" + path + "'");
    }
    // Sniff the format: JSON results start with '{'.
    const int first = in.peek();
    if (first == '{') {
        return read_result_json(in);
    }
    return read_result_csv(in);
}

} // namespace rismiso

#endif // RISMISO_EXPERIMENT_HPP
