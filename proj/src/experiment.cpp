#include "bethestrip/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "bethestrip/ed_crosscheck.hpp"
#include "bethestrip/errors.hpp"
#include "bethestrip/free_solver.hpp"
#include "bethestrip/recursion.hpp"
#include "bethestrip/susy_spectrum.hpp"

namespace bethe {

namespace {

constexpr int csv_schema_version = 1;
constexpr double crosscheck_tolerance = 1e-8;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("invalid number for " + key + ": '" + text + "'");
    return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("invalid integer for " + key + ": '" + text + "'");
    return v;
}

std::string join_numbers(const std::vector<double>& values) {
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) out += (k ? "," : "") + format_number(values[k]);
    return out;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t index) {
    Stream s(seed, {stream_tag::test ^ 0x4547524944ull, index});
    return s.next();
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {
        for (std::size_t k = 0; k < columns_.size(); ++k) out_ << (k ? "," : "") << columns_[k];
        out_ << '\n';
    }
    CsvWriter& cell(double v) { return raw(format_number(v)); }
    CsvWriter& cell(const std::string& s) { return raw(s); }
    void end_row() {
        if (cells_ != columns_.size()) throw VerificationFailure("csv row does not match header");
        out_ << '\n';
        cells_ = 0;
    }
    std::string str() const { return out_.str(); }
    const std::vector<std::string>& columns() const { return columns_; }

private:
    CsvWriter& raw(const std::string& s) {
        out_ << (cells_ ? "," : "") << s;
        ++cells_;
        return *this;
    }
    std::vector<std::string> columns_;
    std::ostringstream out_;
    std::size_t cells_ = 0;
};

PopulationParams population_params(const ExperimentConfig& c, std::uint64_t seed) {
    PopulationParams p;
    p.pool_size = c.pool;
    p.burn_in = c.burnin;
    p.sweeps_per_level = c.sweeps;
    p.samples = c.samples;
    p.seed = seed;
    p.chunks = c.chunks;
    p.workers = c.workers;
    return p;
}

int exit_code_for(const Error& e) {
    switch (e.category()) {
        case Error::Category::config: return 2;
        case Error::Category::domain: return 3;
        case Error::Category::verification: return 4;
    }
    return 1;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << v;
    return out.str();
}

}  // namespace

// --- formatting -------------------------------------------------------------

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double("list", item));
    return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// --- grid and config --------------------------------------------------------

Grid Grid::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ConfigError("grid must be lo:hi:count, got '" + text + "'");
    Grid g{parse_double("grid", parts[0]), parse_double("grid", parts[1]), parse_int<int>("grid", parts[2])};
    if (g.count < 1) throw ConfigError("grid '" + text + "' is empty");
    if (!std::isfinite(g.lo) || !std::isfinite(g.hi) || g.hi < g.lo) throw ConfigError("grid needs lo <= hi");
    return g;
}

std::vector<double> Grid::points() const {
    std::vector<double> out;
    if (count == 1) return {lo};
    for (int k = 0; k < count; ++k) out.push_back(k == count - 1 ? hi : lo + (hi - lo) * k / (count - 1));
    return out;
}

std::string Grid::str() const { return format_number(lo) + ":" + format_number(hi) + ":" + std::to_string(count); }

const std::vector<std::string>& ExperimentConfig::keys() {
    static const std::vector<std::string> k{"command", "K",       "m",       "A",     "lambda", "ensemble",
                                            "E-grid",  "eta-schedule", "pool", "sweeps", "burnin", "samples",
                                            "depth",   "degree",  "seed",    "workers", "chunks", "out",
                                            "seed-offset"};
    return k;
}

std::map<std::string, std::string> ExperimentConfig::to_kv() const {
    std::map<std::string, std::string> kv;
    kv["command"] = command;
    kv["K"] = std::to_string(K);
    kv["m"] = std::to_string(m);
    kv["A"] = "diag:" + join_numbers(a);
    kv["lambda"] = format_number(lambda);
    kv["ensemble"] = ensemble;
    kv["E-grid"] = energies.str();
    kv["eta-schedule"] = join_numbers(etas);
    kv["pool"] = std::to_string(pool);
    kv["sweeps"] = std::to_string(sweeps);
    kv["burnin"] = std::to_string(burnin);
    kv["samples"] = std::to_string(samples);
    kv["depth"] = std::to_string(depth);
    kv["degree"] = std::to_string(degree);
    kv["seed"] = std::to_string(seed);
    kv["workers"] = std::to_string(workers);
    kv["chunks"] = std::to_string(chunks);
    kv["out"] = out;
    kv["seed-offset"] = std::to_string(seed_offset);
    return kv;
}

ExperimentConfig ExperimentConfig::from_kv(const std::map<std::string, std::string>& kv) {
    ExperimentConfig c;
    bool a_given = false;
    for (const auto& [key, value] : kv) {
        if (key == "command") c.command = trim(value);
        else if (key == "K") c.K = parse_int<int>(key, value);
        else if (key == "m") c.m = parse_int<int>(key, value);
        else if (key == "A") {
            const std::string v = trim(value);
            if (v.rfind("diag:", 0) != 0) throw ConfigError("A must be given as diag:v1,v2,...");
            c.a = parse_number_list(v.substr(5));
            a_given = true;
        } else if (key == "lambda") c.lambda = parse_double(key, value);
        else if (key == "ensemble") c.ensemble = trim(value);
        else if (key == "E-grid") c.energies = Grid::parse(trim(value));
        else if (key == "eta-schedule") c.etas = parse_number_list(value);
        else if (key == "pool") c.pool = parse_int<std::size_t>(key, value);
        else if (key == "sweeps") c.sweeps = parse_int<int>(key, value);
        else if (key == "burnin") c.burnin = parse_int<int>(key, value);
        else if (key == "samples") c.samples = parse_int<std::size_t>(key, value);
        else if (key == "depth") c.depth = parse_int<int>(key, value);
        else if (key == "degree") c.degree = parse_int<int>(key, value);
        else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, value);
        else if (key == "workers") c.workers = parse_int<int>(key, value);
        else if (key == "chunks") c.chunks = parse_int<int>(key, value);
        else if (key == "out") c.out = trim(value);
        else if (key == "seed-offset") c.seed_offset = parse_int<std::uint64_t>(key, value);
        else throw ConfigError("unknown configuration key '" + key + "'");
    }
    if (!a_given) c.a.assign(c.m, 0.0);
    return c;
}

std::map<std::string, std::string> ExperimentConfig::read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

void ExperimentConfig::validate() const {
    if (std::find(subcommands.begin(), subcommands.end(), command) == subcommands.end())
        throw ConfigError("unknown subcommand '" + command + "'");
    if (K < 2) throw ConfigError("K must be >= 2");
    if (m < 1 || m > max_width) throw ConfigError("m must be in [1, 16]");
    if (static_cast<int>(a.size()) != m) throw ConfigError("A must list exactly m diagonal entries");
    if (etas.empty()) throw ConfigError("eta schedule is empty");
    for (std::size_t k = 0; k < etas.size(); ++k) {
        if (!(etas[k] >= 0.0) || !std::isfinite(etas[k])) throw ConfigError("eta values must be finite and >= 0");
        if (k > 0 && !(etas[k] < etas[k - 1])) throw ConfigError("eta schedule must be strictly decreasing");
    }
    if (pool < 2) throw ConfigError("pool must be >= 2");
    if (sweeps < 0 || burnin < 0) throw ConfigError("sweeps and burnin must be >= 0");
    if (samples < 1) throw ConfigError("samples must be >= 1");
    if (depth < 0) throw ConfigError("depth must be >= 0");
    if (degree < 0) throw ConfigError("degree must be >= 0");
    if (workers < 0) throw ConfigError("workers must be >= 0");
    if (chunks < 1) throw ConfigError("chunks must be >= 1");
}

BetheStripModel ExperimentConfig::model() const {
    return BetheStripModel(K, a, lambda, parse_ensemble(ensemble, m));
}

// --- commands ---------------------------------------------------------------

CommandResult cmd_free_profile(const ExperimentConfig& config) {
    config.validate();
    const BetheStripModel model = config.model();
    const int m = model.m();
    const double K = model.K();
    std::vector<std::string> cols{"E", "eta"};
    for (int k = 0; k < m; ++k) {
        const std::string s = std::to_string(k + 1);
        cols.insert(cols.end(), {"re_G0_" + s, "im_G0_" + s, "re_Gfull_" + s, "im_Gfull_" + s});
    }
    for (int k = 0; k < m; ++k) {
        const std::string s = std::to_string(k + 1);
        cols.insert(cols.end(), {"re_AE_" + s, "im_AE_" + s});
    }
    CsvWriter csv(cols);
    for (double E : config.energies.points()) {
        for (double eta : config.etas) {
            const SpectralPoint z(E, eta);
            const ComplexSymMatrix g0 = eta > 0.0 ? free_forward_green(z, model) : free_forward_green_boundary(E, model);
            csv.cell(E).cell(eta);
            for (int k = 0; k < m; ++k) {
                const cplx full = 1.0 / (model.a()[k] - z.z() - (K + 1.0) / 4.0 * g0(k, k));
                csv.cell(g0(k, k).real()).cell(g0(k, k).imag()).cell(full.real()).cell(full.imag());
            }
            for (int k = 0; k < m; ++k) {
                const double d = E - model.a()[k];
                if (std::abs(d) <= std::sqrt(K)) {
                    const double root = std::sqrt(std::max(0.0, K - d * d));
                    csv.cell(d / (2.0 * K)).cell(-root / (2.0 * K));
                } else {
                    csv.cell(std::nan("")).cell(std::nan(""));
                }
            }
            csv.end_row();
        }
    }
    return {csv.str(), nullptr, nlohmann::json::object(), csv.columns(), 0};
}

CommandResult cmd_dos_scan(const ExperimentConfig& config) {
    config.validate();
    const BetheStripModel model = config.model();
    CsvWriter csv({"E", "eta", "dos", "dos_stderr", "ETrG2", "ETrG2_stderr"});
    const auto energies = config.energies.points();
    for (std::size_t e = 0; e < energies.size(); ++e) {
        const auto levels = eta_continuation(model, energies[e], config.etas,
                                             population_params(config, derived_seed(config.seed, e)));
        for (const auto& level : levels) {
            const auto& mo = level.moments;
            csv.cell(energies[e]).cell(level.eta).cell(mo.dos.mean).cell(mo.dos.std_error);
            csv.cell(mo.trace_abs2.mean).cell(mo.trace_abs2.std_error);
            csv.end_row();
        }
    }
    return {csv.str(), nullptr, nlohmann::json::object(), csv.columns(), 0};
}

CommandResult cmd_ac_indicator(const ExperimentConfig& config) {
    config.validate();
    if (config.etas.size() < 3) throw ConfigError("ac-indicator needs an eta schedule with at least 3 levels");
    const BetheStripModel model = config.model();
    std::vector<std::string> cols{"E"};
    for (double eta : config.etas) {
        cols.push_back("ETrG2@" + format_number(eta));
        cols.push_back("ETrG2_stderr@" + format_number(eta));
    }
    cols.insert(cols.end(), {"ratio", "bounded"});
    CsvWriter csv(cols);
    nlohmann::json points = nlohmann::json::array();
    bool all_bounded = true;
    const auto energies = config.energies.points();
    for (std::size_t e = 0; e < energies.size(); ++e) {
        const auto levels = eta_continuation(model, energies[e], config.etas,
                                             population_params(config, derived_seed(config.seed, e)));
        csv.cell(energies[e]);
        for (const auto& level : levels) csv.cell(level.moments.trace_abs2.mean).cell(level.moments.trace_abs2.std_error);
        const double last = levels.back().moments.trace_abs2.mean;
        const double prev = levels[levels.size() - 2].moments.trace_abs2.mean;
        const double ratio = last / prev;
        const bool bounded = ratio >= 0.9 && ratio <= 1.1;
        all_bounded = all_bounded && bounded;
        csv.cell(ratio).cell(bounded ? "true" : "false");
        csv.end_row();
        points.push_back({{"E", energies[e]}, {"ratio", ratio}, {"bounded", bounded}});
    }
    nlohmann::json verdict{{"points", points},
                           {"all_bounded", all_bounded},
                           {"criterion", "E Tr|G|^2 ratio between the last two eta levels within [0.9, 1.1]"},
                           {"note", "numerical indicator contrast, not a proof of absolutely continuous spectrum"}};
    return {csv.str(), verdict, nlohmann::json::object(), csv.columns(), 0};
}

CommandResult cmd_gap_scan(const ExperimentConfig& config) {
    config.validate();
    const BetheStripModel model = config.model();
    CsvWriter csv({"E", "gap_kce", "gap_tensor", "min_dist_inv_K"});
    int skipped = 0;
    for (double E : config.energies.points()) {
        if (!interval_iak(model).contains(E)) {
            ++skipped;
            continue;
        }
        csv.cell(E)
            .cell(gap_kce(E, model, config.degree))
            .cell(gap_tensor(E, model, config.degree))
            .cell(min_distance_to_inverse_k(E, model, config.degree));
        csv.end_row();
    }
    nlohmann::json warnings = nlohmann::json::object();
    warnings["out_of_band_rows_skipped"] = skipped;
    return {csv.str(), nullptr, warnings, csv.columns(), 0};
}

CommandResult cmd_ce_spectrum(const ExperimentConfig& config) {
    config.validate();
    const BetheStripModel model = config.model();
    CsvWriter csv({"E", "J", "degree", "re_lambda", "im_lambda", "modulus", "K_pow_minus_degree",
                   "triangularity_residual"});
    for (double E : config.energies.points()) {
        const OperatorMatrix op = build_ce_matrix(E, model, config.degree);
        for (const auto& J : op.basis) {
            const cplx l = lambda_j(E, model, J);
            csv.cell(E).cell(J.label()).cell(static_cast<double>(J.degree()));
            csv.cell(l.real()).cell(l.imag()).cell(std::abs(l)).cell(std::pow(double(model.K()), -J.degree()));
            csv.cell(op.triangularity_residual);
            csv.end_row();
        }
    }
    return {csv.str(), nullptr, nlohmann::json::object(), csv.columns(), 0};
}

CommandResult cmd_crosscheck(const ExperimentConfig& config) {
    config.validate();
    const BetheStripModel model = config.model();
    const TruncatedTree tree = build_tree(model.K(), config.depth, model.m());
    double worst = 0.0;
    nlohmann::json cases = nlohmann::json::array();
    for (double E : config.energies.points()) {
        for (double eta : config.etas) {
            if (!(eta > 0.0)) throw ConfigError("crosscheck requires eta > 0");
            const SpectralPoint z(E, eta);
            double dev = 0.0;
            for (std::size_t t = 0; t < config.samples; ++t) {
                const ComplexSymMatrix recursion = sample_tree(z, model, config.depth, config.seed, t);
                const ComplexSymMatrix direct = root_block(tree, model, config.seed + config.seed_offset, t, z);
                dev = std::max(dev, max_abs(recursion.dense() - direct.dense()));
            }
            worst = std::max(worst, dev);
            cases.push_back({{"E", E}, {"eta", eta}, {"max_deviation", dev}});
        }
    }
    const bool pass = worst <= crosscheck_tolerance;
    nlohmann::json report{{"depth", config.depth},
                          {"realizations", config.samples},
                          {"sites", tree.size()},
                          {"tolerance", crosscheck_tolerance},
                          {"max_deviation", worst},
                          {"pass", pass},
                          {"cases", cases}};
    return {std::string(), report, nlohmann::json::object(), {}, pass ? 0 : 4};
}

CommandResult run_command(const ExperimentConfig& config) {
    if (config.command == "free-profile") return cmd_free_profile(config);
    if (config.command == "dos-scan") return cmd_dos_scan(config);
    if (config.command == "ac-indicator") return cmd_ac_indicator(config);
    if (config.command == "gap-scan") return cmd_gap_scan(config);
    if (config.command == "ce-spectrum") return cmd_ce_spectrum(config);
    if (config.command == "crosscheck") return cmd_crosscheck(config);
    throw ConfigError("unknown subcommand '" + config.command + "'");
}

int run_experiment(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    CommandResult result;
    try {
        result = run_command(config);
    } catch (const Error& e) {
        std::cerr << "bethe-strip: " << e.what() << '\n';
        return exit_code_for(e);
    }

    std::map<std::string, std::string> written;
    auto emit = [&](const std::string& path, const std::string& body) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + path + "'");
        out << body;
        written[path] = body;
    };

    try {
        const bool json_only = result.csv.empty() && !result.report.is_null();
        if (config.out.empty()) {
            std::cout << (json_only ? result.report.dump(2) + "\n" : result.csv);
            if (!json_only && !result.report.is_null()) std::cerr << result.report.dump(2) << '\n';
            return result.exit_code;
        }
        if (json_only) {
            emit(config.out, result.report.dump(2) + "\n");
        } else {
            emit(config.out, result.csv);
            if (!result.report.is_null()) emit(config.out + ".verdict.json", result.report.dump(2) + "\n");
        }

        nlohmann::json manifest;
        manifest["artifact"] = "bethestrip";
        manifest["version"] = BETHESTRIP_VERSION;
        manifest["command"] = config.command;
        manifest["config"] = config.to_kv();
        manifest["schema"] = {{"version", csv_schema_version}, {"columns", result.columns}};
        manifest["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        nlohmann::json digests = nlohmann::json::object();
        for (const auto& [path, body] : written) digests[path] = "fnv1a64:" + hex64(fnv1a64(body));
        manifest["outputs"] = digests;
        manifest["warnings"] = result.warnings;
        manifest["exit_code"] = result.exit_code;
        std::ofstream(config.out + ".manifest.json") << manifest.dump(2) << '\n';
    } catch (const Error& e) {
        std::cerr << "bethe-strip: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return result.exit_code;
}

}  // namespace bethe
