#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "elltest/gof_test.hpp"
#include "elltest/models.hpp"

namespace elltest {

enum class SimulationMode { Level, Power };

[[nodiscard]] std::string_view to_string(SimulationMode mode);
[[nodiscard]] SimulationMode parse_simulation_mode(std::string_view name);

/**
 * One Monte Carlo cell (level mode) or one h-curve (power mode).
 *
 * `mixing` is either a numbered setting "i".."v" or a family name accepted by
 * parse_mixing_family(), in which case `tau` and `b` parameterize it.
 */
struct SimulationConfig {
    SimulationMode mode = SimulationMode::Level;
    std::string mixing = "i";
    double tau = 0.0;
    double b = 0.0;
    ShockFamily shock = ShockFamily::LaplaceStd;
    int model = 4;
    double rho = 0.1;
    long n = 400;
    long p = 200;
    long trials = 2000;
    double alpha = 0.05;
    std::vector<double> h_grid;
    std::uint64_t seed = 1;
    int threads = 0;  ///< 0 = hardware concurrency

    void validate() const;
};

/// Mixing law for a config at its dimension p. Settings:
/// (i) chi^2_p, (ii) BetaPrime tau = 3, (iii) (p+4) Beta(p/2, 2),
/// (iv) Gamma(p/5, 1/5), (v) Gamma(p, 1)^2 / (p + 1).
[[nodiscard]] MixingDistribution resolve_mixing(const SimulationConfig& cfg);

struct ReportRow {
    std::optional<double> h;  ///< power mode only
    long trials = 0;
    long rejections = 0;
    double rate = 0.0;
    double se = 0.0;     ///< sqrt(rate (1 - rate) / trials)
    double mean_z = 0.0;
    double var_z = 0.0;  ///< unbiased; 0 for a single trial
};

struct SimulationReport {
    SimulationConfig config;
    std::vector<ReportRow> rows;
    double wall_seconds = 0.0;  ///< informational; never written to report files
};

struct TrialOutcome {
    double z = 0.0;
    bool reject = false;
};

/// Per-trial outcomes in trial order. Trial t draws from the substream
/// derive_seed(seed, t); the covariance eigenbasis (models 1 and 3) comes from
/// a reserved design substream. Results do not depend on cfg.threads.
/// `h` selects the alternative sampler; without it the elliptical sampler is used.
[[nodiscard]] std::vector<TrialOutcome> run_trials(const SimulationConfig& cfg, std::optional<double> h);

[[nodiscard]] ReportRow summarize(const std::vector<TrialOutcome>& outcomes, std::optional<double> h);

[[nodiscard]] SimulationReport simulate_level(const SimulationConfig& cfg);
[[nodiscard]] SimulationReport simulate_power(const SimulationConfig& cfg);

/// The dataset trial `trial` of cfg would test (h as in run_trials).
[[nodiscard]] DataMatrix generate_dataset(const SimulationConfig& cfg, std::optional<double> h,
                                          std::uint64_t trial = 0);

/// Sigma^{1/2} for cfg's covariance model, drawn from the design substream.
[[nodiscard]] CovarianceDesign design_for(const SimulationConfig& cfg);

}  // namespace elltest
