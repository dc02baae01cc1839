#include "elltest/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "elltest/error.hpp"
#include "elltest/rng.hpp"

namespace elltest {

namespace {

constexpr std::uint64_t kDesignStream = std::numeric_limits<std::uint64_t>::max();

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename Task>
void parallel_for(long count, int threads, Task&& task) {
    const int workers = static_cast<int>(std::min<long>(resolve_threads(threads), std::max(count, 1L)));
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(count);
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace

std::string_view to_string(SimulationMode mode) {
    return mode == SimulationMode::Level ? "level" : "power";
}

SimulationMode parse_simulation_mode(std::string_view name) {
    if (name == "level") {
        return SimulationMode::Level;
    }
    if (name == "power") {
        return SimulationMode::Power;
    }
    throw ValidationError("unknown simulation mode '" + std::string(name) + "'");
}

void SimulationConfig::validate() const {
    if (trials < 1) {
        throw ValidationError("trials must be at least 1");
    }
    if (n < 4 || n % 2 != 0) {
        throw ValidationError("n must be even and at least 4, got " + std::to_string(n));
    }
    if (p < 1) {
        throw ValidationError("p must be positive");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("alpha must lie in (0, 1)");
    }
    if (model < 1 || model > 4) {
        throw ValidationError("covariance model must be 1..4, got " + std::to_string(model));
    }
    if (mode == SimulationMode::Level && !h_grid.empty()) {
        throw ValidationError("level mode takes no h grid");
    }
    if (mode == SimulationMode::Power && h_grid.empty()) {
        throw ValidationError("power mode needs a non-empty h grid");
    }
    for (double h : h_grid) {
        if (!(h >= 0.0 && h <= 1.0)) {
            throw ValidationError("h values must lie in [0, 1]");
        }
    }
    if (mode == SimulationMode::Level) {
        resolve_mixing(*this).validate();
    }
    CovarianceModel cov = CovarianceModel::numbered(model, p);
    cov.rho = rho;
    cov.validate();
}

MixingDistribution resolve_mixing(const SimulationConfig& cfg) {
    const std::string& s = cfg.mixing;
    if (s == "i") {
        return MixingDistribution::chi_squared(cfg.p);
    }
    if (s == "ii") {
        return MixingDistribution::beta_prime(cfg.p, 3.0);
    }
    if (s == "iii") {
        return MixingDistribution::beta_scaled(cfg.p, 2.0);
    }
    if (s == "iv") {
        return MixingDistribution::gamma_shape_rate(cfg.p, 5.0);
    }
    if (s == "v") {
        return MixingDistribution::gamma_squared_scaled(cfg.p);
    }
    MixingDistribution mix;
    mix.family = parse_mixing_family(s);
    mix.p = cfg.p;
    mix.tau = cfg.tau;
    mix.b = cfg.b;
    if (mix.family == MixingFamily::ChiSquared) {
        mix.tau = 2.0;
    } else if (mix.family == MixingFamily::Poisson) {
        mix.tau = 1.0;
    }
    return mix;
}

CovarianceDesign design_for(const SimulationConfig& cfg) {
    CovarianceModel cov = CovarianceModel::numbered(cfg.model, cfg.p);
    cov.rho = cfg.rho;
    Rng rng = make_stream_rng(cfg.seed, kDesignStream);
    return build_covariance_design(cov, rng);
}

namespace {

DataMatrix draw(const SimulationConfig& cfg, const SymMatrix& root, const MixingDistribution& mix,
                std::optional<double> h, std::uint64_t trial) {
    Rng rng = make_stream_rng(cfg.seed, trial);
    if (h) {
        return alternative_sample(cfg.n, AlternativeModel{root, *h, cfg.shock}, rng);
    }
    return elliptical_sample(cfg.n, root, mix, rng);
}

}  // namespace

std::vector<TrialOutcome> run_trials(const SimulationConfig& cfg, std::optional<double> h) {
    const CovarianceDesign design = design_for(cfg);
    const MixingDistribution mix = h ? MixingDistribution::chi_squared(cfg.p) : resolve_mixing(cfg);
    TestOptions opts;
    opts.alpha = cfg.alpha;
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
    parallel_for(cfg.trials, cfg.threads, [&](long t) {
        const DataMatrix x = draw(cfg, design.root, mix, h, static_cast<std::uint64_t>(t));
        const TestResult r = run_test(x, opts);
        outcomes[static_cast<std::size_t>(t)] = {r.z, r.reject};
    });
    return outcomes;
}

ReportRow summarize(const std::vector<TrialOutcome>& outcomes, std::optional<double> h) {
    ReportRow row;
    row.h = h;
    row.trials = static_cast<long>(outcomes.size());
    if (outcomes.empty()) {
        return row;
    }
    double sum_z = 0.0;
    for (const auto& o : outcomes) {
        row.rejections += o.reject ? 1 : 0;
        sum_z += o.z;
    }
    const double t = static_cast<double>(row.trials);
    row.rate = static_cast<double>(row.rejections) / t;
    row.se = std::sqrt(row.rate * (1.0 - row.rate) / t);
    row.mean_z = sum_z / t;
    if (row.trials > 1) {
        double ss = 0.0;
        for (const auto& o : outcomes) {
            ss += (o.z - row.mean_z) * (o.z - row.mean_z);
        }
        row.var_z = ss / (t - 1.0);
    }
    return row;
}

SimulationReport simulate_level(const SimulationConfig& cfg) {
    if (cfg.mode != SimulationMode::Level) {
        throw ValidationError("simulate_level: config is not in level mode");
    }
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    SimulationReport report;
    report.config = cfg;
    report.rows.push_back(summarize(run_trials(cfg, std::nullopt), std::nullopt));
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

SimulationReport simulate_power(const SimulationConfig& cfg) {
    if (cfg.mode != SimulationMode::Power) {
        throw ValidationError("simulate_power: config is not in power mode");
    }
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    SimulationReport report;
    report.config = cfg;
    for (double h : cfg.h_grid) {
        report.rows.push_back(summarize(run_trials(cfg, h), h));
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

DataMatrix generate_dataset(const SimulationConfig& cfg, std::optional<double> h, std::uint64_t trial) {
    const CovarianceDesign design = design_for(cfg);
    const MixingDistribution mix = h ? MixingDistribution::chi_squared(cfg.p) : resolve_mixing(cfg);
    return draw(cfg, design.root, mix, h, trial);
}

}  // namespace elltest
