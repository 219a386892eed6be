#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "bethestrip/model.hpp"

namespace bethe {

// "lo:hi:count" energy grid; count >= 1, a single point sits at lo.
struct Grid {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;

    static Grid parse(const std::string& text);
    std::vector<double> points() const;
    std::string str() const;
    bool operator==(const Grid&) const = default;
};

// Experiment description shared by every subcommand. Serialized as flat
// key=value pairs whose keys are the CLI flag names without dashes.
struct ExperimentConfig {
    std::string command;
    int K = 2;
    int m = 1;
    std::vector<double> a{0.0};
    double lambda = 0.0;
    std::string ensemble = "goe";
    Grid energies{-1.0, 1.0, 5};
    std::vector<double> etas{1e-2};
    std::size_t pool = 10000;
    int sweeps = 100;
    int burnin = 100;
    std::size_t samples = 10000;
    int depth = 4;
    int degree = 2;
    std::uint64_t seed = 1;
    int workers = 0;
    int chunks = 64;
    std::string out;
    // deliberately desynchronizes the two crosscheck paths (harness self-test)
    std::uint64_t seed_offset = 0;

    static const std::vector<std::string>& keys();
    static ExperimentConfig from_kv(const std::map<std::string, std::string>& kv);
    std::map<std::string, std::string> to_kv() const;
    static std::map<std::string, std::string> read_kv_file(const std::string& path);

    void validate() const;
    BetheStripModel model() const;

    bool operator==(const ExperimentConfig&) const = default;
};

inline const std::vector<std::string> subcommands{"free-profile", "dos-scan",    "ac-indicator",
                                                  "gap-scan",     "ce-spectrum", "crosscheck"};

struct CommandResult {
    std::string csv;            // empty for JSON-only commands
    nlohmann::json report;      // verdict / crosscheck report, null when absent
    nlohmann::json warnings = nlohmann::json::object();
    std::vector<std::string> columns;
    int exit_code = 0;
};

// Shortest round-trip decimal; "nan" / "inf" / "-inf" for non-finite values.
std::string format_number(double v);
std::vector<double> parse_number_list(const std::string& text);
std::uint64_t fnv1a64(const std::string& bytes);

CommandResult cmd_free_profile(const ExperimentConfig& config);
CommandResult cmd_dos_scan(const ExperimentConfig& config);
CommandResult cmd_ac_indicator(const ExperimentConfig& config);
CommandResult cmd_gap_scan(const ExperimentConfig& config);
CommandResult cmd_ce_spectrum(const ExperimentConfig& config);
CommandResult cmd_crosscheck(const ExperimentConfig& config);

CommandResult run_command(const ExperimentConfig& config);

// Runs the command, writes outputs (stdout when `out` is empty) and the
// <out>.manifest.json run record. Returns the process exit code:
// 0 success, 2 config, 3 domain, 4 verification failure.
int run_experiment(const ExperimentConfig& config);

}  // namespace bethe
