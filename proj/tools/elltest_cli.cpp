// elltest: command-line front end for the elliptical goodness-of-fit test.
//
//   elltest test data.csv [--header] [--columns first:100] [--log-returns]
//   elltest simulate-level --mixing i --model 4 --n 400 --p 200 --trials 2000
//   elltest simulate-power --shock laplace --model 4 --h 0,0.5,1
//   elltest generate --mixing iv --model 2 --n 400 --p 200 --out sample.csv
//
// Exit codes: test -> 0 accept, 1 reject; other commands -> 0 on success;
// any error -> 2.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "elltest/error.hpp"
#include "elltest/gof_test.hpp"
#include "elltest/harness.hpp"
#include "elltest/io.hpp"

namespace {

constexpr int kExitAccept = 0;
constexpr int kExitReject = 1;
constexpr int kExitError = 2;

struct SimFlags {
    std::string config_path;
    std::optional<std::string> mixing;
    std::optional<double> tau;
    std::optional<double> b;
    std::optional<std::string> shock;
    std::optional<int> model;
    std::optional<double> rho;
    std::optional<long> n;
    std::optional<long> p;
    std::optional<long> trials;
    std::optional<double> alpha;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::vector<double> h_grid;
    std::string out;
    std::string format = "csv";
};

void add_sim_flags(CLI::App* cmd, SimFlags& f, bool power) {
    // "-h" would collide with --h (the alternative-mixing weight).
    cmd->set_help_flag("--help", "Print this help message and exit");
    cmd->add_option("--config", f.config_path, "JSON config file (flags override its values)");
    cmd->add_option("--mixing", f.mixing, "Mixing setting i..v, or a family name");
    cmd->add_option("--tau", f.tau, "tau for named mixing families");
    cmd->add_option("--b", f.b, "b for the scaled Beta family");
    cmd->add_option("--model", f.model, "Covariance model 1..4");
    cmd->add_option("--rho", f.rho, "Toeplitz parameter for model 2");
    cmd->add_option("--n", f.n, "Sample size (even)");
    cmd->add_option("--p", f.p, "Dimension");
    cmd->add_option("--trials", f.trials, "Monte Carlo trials per cell");
    cmd->add_option("--alpha", f.alpha, "Nominal level");
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
    cmd->add_option("--out", f.out, "Report path (default: stdout)");
    cmd->add_option("--format", f.format, "Report format: csv or json")->check(CLI::IsMember({"csv", "json"}));
    if (power) {
        cmd->add_option("--shock", f.shock, "Shock family: laplace or beta");
        cmd->add_option("--h", f.h_grid, "Comma-separated h grid in [0, 1]")->delimiter(',');
    }
}

elltest::SimulationConfig build_config(const SimFlags& f, elltest::SimulationMode mode) {
    elltest::SimulationConfig c;
    c.mode = mode;
    if (mode == elltest::SimulationMode::Power) {
        c.trials = 500;
        c.h_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    }
    if (!f.config_path.empty()) {
        c = elltest::load_config(f.config_path, c);
        c.mode = mode;
    }
    if (f.mixing) c.mixing = *f.mixing;
    if (f.tau) c.tau = *f.tau;
    if (f.b) c.b = *f.b;
    if (f.shock) c.shock = elltest::parse_shock_family(*f.shock);
    if (f.model) c.model = *f.model;
    if (f.rho) c.rho = *f.rho;
    if (f.n) c.n = *f.n;
    if (f.p) c.p = *f.p;
    if (f.trials) c.trials = *f.trials;
    if (f.alpha) c.alpha = *f.alpha;
    if (f.seed) c.seed = *f.seed;
    if (f.threads) c.threads = *f.threads;
    if (!f.h_grid.empty()) c.h_grid = f.h_grid;
    if (mode == elltest::SimulationMode::Level) {
        c.h_grid.clear();
    }
    return c;
}

void output_report(const elltest::SimulationReport& report, const SimFlags& f) {
    const auto format = elltest::parse_report_format(f.format);
    if (f.out.empty()) {
        elltest::write_report(report, std::cout, format);
    } else {
        elltest::emit_report(report, f.out, format);
    }
    std::cerr << "elltest: " << report.rows.size() << " row(s) in " << report.wall_seconds << " s\n";
}

nlohmann::json result_to_json(const elltest::TestResult& r) {
    nlohmann::json j;
    j["n"] = r.n_used;
    j["p"] = r.p;
    j["alpha"] = r.alpha;
    j["t_n"] = r.t_n;
    j["sigma_hat"] = r.sigma_hat;
    j["z"] = r.z;
    j["p_value"] = r.p_value;
    j["reject"] = r.reject;
    j["degenerate_variance"] = r.degenerate_variance;
    j["kappa_tilde"] = r.kappa.kappa_tilde;
    j["kappa_check"] = r.kappa.kappa_check;
    j["sigma1_sq"] = r.variance.sigma1_sq;
    j["sigma2_sq"] = r.variance.sigma2_sq;
    j["c_hat"] = r.variance.c_hat;
    j["beta_hat"] = r.variance.beta_hat;
    j["gamma_hat"] = r.variance.gamma_hat;
    j["t_p"] = r.variance.t_p;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goodness-of-fit test for elliptical models in high dimensions"};
    app.require_subcommand(1);

    // test
    std::string csv_path;
    bool header = false;
    std::string delimiter = ",";
    std::string columns = "all";
    bool center = true;
    bool drop_odd = true;
    bool use_log_returns = false;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> shuffle_seed;
    std::string test_out;
    auto* test_cmd = app.add_subcommand("test", "Run the test on a numeric CSV (rows = observations)");
    test_cmd->add_option("csv", csv_path, "Input CSV file")->required()->check(CLI::ExistingFile);
    test_cmd->add_flag("--header", header, "First non-blank line is a header");
    test_cmd->add_option("--delimiter", delimiter, "Field delimiter (single character)");
    test_cmd->add_option("--columns", columns, "all | first:D | random:D | comma-separated 0-based indices");
    test_cmd->add_flag("--center,!--no-center", center, "Subtract column means (default on)");
    test_cmd->add_flag("--drop-odd-row,!--keep-odd-row", drop_odd, "Drop the last row if n is odd (default on)");
    test_cmd->add_flag("--log-returns", use_log_returns, "Convert price columns to log returns first");
    test_cmd->add_option("--alpha", alpha, "Nominal level");
    test_cmd->add_option("--seed", seed, "Seed for random column subsets");
    test_cmd->add_option("--shuffle-seed", shuffle_seed, "Shuffle rows with this seed before splitting");
    test_cmd->add_option("--out", test_out, "Also write the JSON result to this file");

    SimFlags level_flags;
    auto* level_cmd = app.add_subcommand("simulate-level", "Empirical level under an elliptical null");
    add_sim_flags(level_cmd, level_flags, false);

    SimFlags power_flags;
    auto* power_cmd = app.add_subcommand("simulate-power", "Rejection rate along an h grid of alternatives");
    add_sim_flags(power_cmd, power_flags, true);

    SimFlags gen_flags;
    std::optional<double> gen_h;
    std::uint64_t gen_trial = 0;
    auto* gen_cmd = app.add_subcommand("generate", "Write one synthetic dataset to CSV");
    add_sim_flags(gen_cmd, gen_flags, false);
    gen_cmd->add_option("--shock", gen_flags.shock, "Shock family for --h: laplace or beta");
    gen_cmd->add_option("--h", gen_h, "Draw from the alternative model with this h instead");
    gen_cmd->add_option("--trial", gen_trial, "Trial index whose substream to use");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (*test_cmd) {
            if (delimiter.size() != 1) {
                throw elltest::ValidationError("--delimiter must be a single character");
            }
            elltest::CsvOptions csv;
            csv.header = header;
            csv.delimiter = delimiter.front();
            csv.columns = elltest::ColumnSelection::parse(columns, seed);
            elltest::DataMatrix x = elltest::read_csv_matrix(csv_path, csv);
            if (use_log_returns) {
                x = elltest::log_returns(x);
            }
            elltest::TestOptions opts;
            opts.alpha = alpha;
            opts.center = center;
            opts.drop_odd_row = drop_odd;
            opts.shuffle_seed = shuffle_seed;
            const auto result = elltest::run_test(x, opts);
            const std::string text = result_to_json(result).dump(2);
            std::cout << text << '\n';
            if (!test_out.empty()) {
                std::ofstream out(test_out);
                out << text << '\n';
                if (!out) {
                    throw elltest::Error("cannot write '" + test_out + "'");
                }
            }
            return result.reject ? kExitReject : kExitAccept;
        }
        if (*level_cmd) {
            const auto cfg = build_config(level_flags, elltest::SimulationMode::Level);
            output_report(elltest::simulate_level(cfg), level_flags);
            return 0;
        }
        if (*power_cmd) {
            const auto cfg = build_config(power_flags, elltest::SimulationMode::Power);
            output_report(elltest::simulate_power(cfg), power_flags);
            return 0;
        }
        if (*gen_cmd) {
            auto cfg = build_config(gen_flags, elltest::SimulationMode::Level);
            cfg.validate();
            const auto x = elltest::generate_dataset(cfg, gen_h, gen_trial);
            if (gen_flags.out.empty()) {
                for (Eigen::Index i = 0; i < x.rows(); ++i) {
                    for (Eigen::Index j = 0; j < x.cols(); ++j) {
                        std::cout << (j ? "," : "") << elltest::format_double(x(i, j));
                    }
                    std::cout << '\n';
                }
            } else {
                elltest::write_csv_matrix(x, gen_flags.out);
            }
            return 0;
        }
    } catch (const elltest::Error& e) {
        std::cerr << "elltest: error: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "elltest: unexpected error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
