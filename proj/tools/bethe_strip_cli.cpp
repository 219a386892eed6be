#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "bethestrip/errors.hpp"
#include "bethestrip/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bethe-strip random Schroedinger operator experiments", "bethe-strip"};
    app.set_version_flag("--version", BETHESTRIP_VERSION);

    std::string command;
    std::string config_path;
    app.add_option("command", command, "free-profile | dos-scan | ac-indicator | gap-scan | ce-spectrum | crosscheck")
        ->required();
    app.add_option("--config", config_path, "key=value file; flags override its entries");

    // Every flag is kept as text and overlaid on the config file before parsing.
    std::map<std::string, std::string> flags;
    const std::map<std::string, std::string> help{
        {"K", "connectivity (each site has K+1 neighbours)"},
        {"m", "strip width"},
        {"A", "diagonal free term, diag:v1,v2,..."},
        {"lambda", "disorder strength"},
        {"ensemble", "goe | diag:uniform | diag:gauss | diag:bernoulli | point:<file or rows>"},
        {"E-grid", "energy grid lo:hi:count"},
        {"eta-schedule", "comma separated, strictly decreasing"},
        {"pool", "population size"},
        {"sweeps", "sweeps per eta level"},
        {"burnin", "burn-in sweeps at the first level"},
        {"samples", "root samples (crosscheck: realizations)"},
        {"depth", "tree depth for crosscheck"},
        {"degree", "maximal monomial degree d"},
        {"seed", "master seed"},
        {"workers", "worker threads (default BETHE_STRIP_THREADS or 1)"},
        {"chunks", "fixed work decomposition"},
        {"out", "output path; stdout when omitted"},
    };
    for (const auto& key : bethe::ExperimentConfig::keys()) {
        if (key == "command") continue;
        auto* opt = app.add_option("--" + key, flags[key], key == "seed-offset" ? "" : help.at(key));
        if (key == "seed-offset") opt->group("");
        opt->allow_extra_args(false);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        std::map<std::string, std::string> kv;
        if (!config_path.empty()) kv = bethe::ExperimentConfig::read_kv_file(config_path);
        for (const auto& [key, value] : flags)
            if (app.count("--" + key) > 0) kv[key] = value;
        kv["command"] = command;
        const bethe::ExperimentConfig config = bethe::ExperimentConfig::from_kv(kv);
        return bethe::run_experiment(config);
    } catch (const bethe::Error& e) {
        std::cerr << "bethe-strip: " << e.what() << '\n';
        switch (e.category()) {
            case bethe::Error::Category::config: return 2;
            case bethe::Error::Category::domain: return 3;
            case bethe::Error::Category::verification: return 4;
        }
    } catch (const std::exception& e) {
        std::cerr << "bethe-strip: " << e.what() << '\n';
    }
    return 1;
}
