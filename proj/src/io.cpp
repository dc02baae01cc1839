#include "elltest/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "elltest/error.hpp"
#include "elltest/rng.hpp"

namespace elltest {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

bool parse_number(std::string_view text, double& out) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    if (text.empty()) {
        return false;
    }
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size() && std::isfinite(out);
}

long parse_long(std::string_view text, const char* what) {
    text = trim(text);
    long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ValidationError(std::string(what) + ": '" + std::string(text) + "' is not an integer");
    }
    return v;
}

}  // namespace

ColumnSelection ColumnSelection::parse(std::string_view spec, std::uint64_t seed) {
    spec = trim(spec);
    if (spec.empty() || spec == "all") {
        return all();
    }
    if (spec.rfind("first:", 0) == 0) {
        return prefix(parse_long(spec.substr(6), "column prefix"));
    }
    if (spec.rfind("random:", 0) == 0) {
        return random(parse_long(spec.substr(7), "random column count"), seed);
    }
    std::vector<long> idx;
    for (auto field : split(spec, ',')) {
        idx.push_back(parse_long(field, "column index"));
    }
    return of(std::move(idx));
}

std::vector<long> ColumnSelection::resolve(long p) const {
    std::vector<long> out;
    switch (kind) {
        case Kind::All:
            out.resize(static_cast<std::size_t>(p));
            std::iota(out.begin(), out.end(), 0L);
            return out;
        case Kind::Indices:
            for (long j : indices) {
                if (j < 0 || j >= p) {
                    throw ValidationError("column index " + std::to_string(j) + " out of range for " +
                                          std::to_string(p) + " columns");
                }
            }
            out = indices;
            return out;
        case Kind::Prefix:
        case Kind::Random: {
            if (count < 1 || count > p) {
                throw ValidationError("column count " + std::to_string(count) + " must lie in 1.." +
                                      std::to_string(p));
            }
            std::vector<long> all_cols(static_cast<std::size_t>(p));
            std::iota(all_cols.begin(), all_cols.end(), 0L);
            if (kind == Kind::Random) {
                // Partial Fisher-Yates: the first `count` slots become the sample.
                Rng rng(derive_seed(seed, 1));
                for (long i = 0; i < count; ++i) {
                    const auto span = static_cast<std::uint64_t>(p - i);
                    const long j = i + static_cast<long>(rng() % span);
                    std::swap(all_cols[static_cast<std::size_t>(i)], all_cols[static_cast<std::size_t>(j)]);
                }
            }
            out.assign(all_cols.begin(), all_cols.begin() + count);
            std::sort(out.begin(), out.end());
            return out;
        }
    }
    return out;
}

DataMatrix parse_csv_matrix(std::istream& in, const CsvOptions& opts) {
    std::vector<std::vector<double>> rows;
    std::string line;
    long line_no = 0;
    std::size_t width = 0;
    bool header_pending = opts.header;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view content = trim(line);
        if (content.empty()) {
            continue;
        }
        const auto fields = split(content, opts.delimiter);
        if (header_pending) {
            header_pending = false;
            width = fields.size();
            continue;
        }
        if (width == 0) {
            width = fields.size();
        } else if (fields.size() != width) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                 " fields, found " + std::to_string(fields.size()),
                             line_no, static_cast<long>(std::min(fields.size(), width) + 1));
        }
        std::vector<double> row(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (!parse_number(fields[j], row[j])) {
                throw ParseError("line " + std::to_string(line_no) + ", field " + std::to_string(j + 1) +
                                     ": '" + std::string(trim(fields[j])) + "' is not a number",
                                 line_no, static_cast<long>(j + 1));
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ParseError("no data rows", -1, -1);
    }
    const std::vector<long> cols = opts.columns.resolve(static_cast<long>(width));
    DataMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][static_cast<std::size_t>(cols[c])];
        }
    }
    return x;
}

DataMatrix read_csv_matrix(const std::filesystem::path& path, const CsvOptions& opts) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open '" + path.string() + "' for reading");
    }
    return parse_csv_matrix(in, opts);
}

void write_csv_matrix(const DataMatrix& x, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << format_double(x(i, j));
        }
        out << '\n';
    }
    if (!out) {
        throw Error("write to '" + path.string() + "' failed");
    }
}

DataMatrix log_returns(const DataView& prices) {
    if (prices.rows() < 2) {
        throw ValidationError("log_returns: need at least two price rows");
    }
    if (!(prices.array() > 0.0).all()) {
        throw ValidationError("log_returns: prices must be strictly positive");
    }
    const Eigen::Index n = prices.rows();
    return (prices.bottomRows(n - 1).array() / prices.topRows(n - 1).array()).log().matrix();
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "csv") {
        return ReportFormat::Csv;
    }
    if (name == "json") {
        return ReportFormat::Json;
    }
    throw ValidationError("unknown report format '" + std::string(name) + "'");
}

namespace {

constexpr std::string_view kReportHeader =
    "mode,mixing,shock,model,n,p,alpha,h,trials,rejections,rate,se,mean_z,var_z,seed";

nlohmann::json config_to_json(const SimulationConfig& c) {
    nlohmann::json j;
    j["mode"] = std::string(to_string(c.mode));
    j["mixing"] = c.mixing;
    j["tau"] = c.tau;
    j["b"] = c.b;
    j["shock"] = std::string(to_string(c.shock));
    j["model"] = c.model;
    j["rho"] = c.rho;
    j["n"] = c.n;
    j["p"] = c.p;
    j["trials"] = c.trials;
    j["alpha"] = c.alpha;
    j["h_grid"] = c.h_grid;
    j["seed"] = c.seed;
    return j;
}

}  // namespace

void write_report(const SimulationReport& report, std::ostream& out, ReportFormat format) {
    const SimulationConfig& c = report.config;
    const bool power = c.mode == SimulationMode::Power;
    if (format == ReportFormat::Json) {
        nlohmann::json j;
        j["config"] = config_to_json(c);
        j["rows"] = nlohmann::json::array();
        for (const auto& r : report.rows) {
            nlohmann::json row;
            row["h"] = r.h ? nlohmann::json(*r.h) : nlohmann::json(nullptr);
            row["trials"] = r.trials;
            row["rejections"] = r.rejections;
            row["rate"] = r.rate;
            row["se"] = r.se;
            row["mean_z"] = r.mean_z;
            row["var_z"] = r.var_z;
            j["rows"].push_back(row);
        }
        out << j.dump(2) << '\n';
        return;
    }
    out << kReportHeader << '\n';
    for (const auto& r : report.rows) {
        out << to_string(c.mode) << ',' << (power ? "" : c.mixing) << ','
            << (power ? std::string(to_string(c.shock)) : std::string()) << ',' << c.model << ',' << c.n << ','
            << c.p << ',' << format_double(c.alpha) << ',' << (r.h ? format_double(*r.h) : std::string()) << ','
            << r.trials << ',' << r.rejections << ',' << format_double(r.rate) << ',' << format_double(r.se)
            << ',' << format_double(r.mean_z) << ',' << format_double(r.var_z) << ',' << c.seed << '\n';
    }
}

void emit_report(const SimulationReport& report, const std::filesystem::path& path, ReportFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    write_report(report, out, format);
    out.flush();
    if (!out) {
        throw Error("write to '" + path.string() + "' failed");
    }
}

SimulationReport read_report_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != kReportHeader) {
        throw ParseError("report CSV: missing or unexpected header", 1, -1);
    }
    SimulationReport report;
    long line_no = 1;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto f = split(trim(line), ',');
        if (f.size() != 15) {
            throw ParseError("report CSV line " + std::to_string(line_no) + ": expected 15 fields", line_no, -1);
        }
        auto num = [&](std::size_t k) {
            double v = 0.0;
            if (!parse_number(f[k], v)) {
                throw ParseError("report CSV line " + std::to_string(line_no) + ": bad number", line_no,
                                 static_cast<long>(k + 1));
            }
            return v;
        };
        SimulationConfig& c = report.config;
        if (first) {
            c.mode = parse_simulation_mode(f[0]);
            if (!f[1].empty()) {
                c.mixing = std::string(f[1]);
            }
            if (!f[2].empty()) {
                c.shock = parse_shock_family(f[2]);
            }
            c.model = static_cast<int>(parse_long(f[3], "model"));
            c.n = parse_long(f[4], "n");
            c.p = parse_long(f[5], "p");
            c.alpha = num(6);
            std::uint64_t seed = 0;
            const auto res = std::from_chars(f[14].data(), f[14].data() + f[14].size(), seed);
            if (res.ec != std::errc{}) {
                throw ParseError("report CSV: bad seed", line_no, 15);
            }
            c.seed = seed;
            first = false;
        }
        ReportRow r;
        if (!f[7].empty()) {
            r.h = num(7);
            c.h_grid.push_back(*r.h);
        }
        r.trials = parse_long(f[8], "trials");
        r.rejections = parse_long(f[9], "rejections");
        r.rate = num(10);
        r.se = num(11);
        r.mean_z = num(12);
        r.var_z = num(13);
        c.trials = r.trials;
        report.rows.push_back(r);
    }
    return report;
}

SimulationConfig parse_config_json(std::string_view text, SimulationConfig base) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what(), -1, -1);
    }
    if (!j.is_object()) {
        throw ParseError("config: top level must be an object", -1, -1);
    }
    SimulationConfig c = std::move(base);
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& key = it.key();
            const auto& v = it.value();
            if (key == "mode") c.mode = parse_simulation_mode(v.get<std::string>());
            else if (key == "mixing") c.mixing = v.get<std::string>();
            else if (key == "tau") c.tau = v.get<double>();
            else if (key == "b") c.b = v.get<double>();
            else if (key == "shock") c.shock = parse_shock_family(v.get<std::string>());
            else if (key == "model") c.model = v.get<int>();
            else if (key == "rho") c.rho = v.get<double>();
            else if (key == "n") c.n = v.get<long>();
            else if (key == "p") c.p = v.get<long>();
            else if (key == "trials") c.trials = v.get<long>();
            else if (key == "alpha") c.alpha = v.get<double>();
            else if (key == "h_grid") c.h_grid = v.get<std::vector<double>>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "threads") c.threads = v.get<int>();
            else throw ValidationError("config: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what(), -1, -1);
    }
    return c;
}

SimulationConfig load_config(const std::filesystem::path& path, SimulationConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open config '" + path.string() + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_json(buf.str(), std::move(base));
}

}  // namespace elltest
