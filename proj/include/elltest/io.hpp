#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "elltest/harness.hpp"

namespace elltest {

/// Which columns of a CSV to keep. Indices are 0-based.
struct ColumnSelection {
    enum class Kind { All, Indices, Prefix, Random };

    Kind kind = Kind::All;
    std::vector<long> indices;  ///< Kind::Indices
    long count = 0;             ///< Kind::Prefix and Kind::Random
    std::uint64_t seed = 0;     ///< Kind::Random

    static ColumnSelection all() { return {}; }
    static ColumnSelection of(std::vector<long> idx) { return {Kind::Indices, std::move(idx), 0, 0}; }
    static ColumnSelection prefix(long d) { return {Kind::Prefix, {}, d, 0}; }
    static ColumnSelection random(long d, std::uint64_t seed) { return {Kind::Random, {}, d, seed}; }

    /// "all", "first:D", "random:D", or a comma-separated index list.
    /// Random subsets take their seed from `seed`.
    static ColumnSelection parse(std::string_view spec, std::uint64_t seed);

    /// Concrete column indices for a table with p columns: ascending for
    /// prefix and random subsets, in the order given for explicit indices.
    [[nodiscard]] std::vector<long> resolve(long p) const;
};

struct CsvOptions {
    bool header = false;
    char delimiter = ',';
    ColumnSelection columns;
};

/// Rectangular numeric CSV -> n x p matrix. Blank lines are skipped.
/// Ragged rows and non-numeric cells raise ParseError with 1-based line/field.
[[nodiscard]] DataMatrix read_csv_matrix(const std::filesystem::path& path, const CsvOptions& opts = {});
[[nodiscard]] DataMatrix parse_csv_matrix(std::istream& in, const CsvOptions& opts = {});

void write_csv_matrix(const DataMatrix& x, const std::filesystem::path& path);

/// (n-1) x p matrix of log(P_{t+1} / P_t).
[[nodiscard]] DataMatrix log_returns(const DataView& prices);

enum class ReportFormat { Csv, Json };

[[nodiscard]] ReportFormat parse_report_format(std::string_view name);

/// Column order: mode,mixing,shock,model,n,p,alpha,h,trials,rejections,rate,se,mean_z,var_z,seed.
/// Level reports leave shock and h empty; power reports leave mixing empty.
void write_report(const SimulationReport& report, std::ostream& out, ReportFormat format);
void emit_report(const SimulationReport& report, const std::filesystem::path& path, ReportFormat format);
[[nodiscard]] SimulationReport read_report_csv(std::istream& in);

/// Shortest decimal text that parses back to exactly `v`.
[[nodiscard]] std::string format_double(double v);

/// Parse a JSON config document whose keys mirror SimulationConfig's fields.
/// Unknown keys are rejected.
[[nodiscard]] SimulationConfig parse_config_json(std::string_view text, SimulationConfig base = {});
[[nodiscard]] SimulationConfig load_config(const std::filesystem::path& path, SimulationConfig base = {});

}  // namespace elltest
