#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bethestrip/errors.hpp"
#include "bethestrip/experiment.hpp"

using namespace bethe;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

ExperimentConfig config(const std::string& command) {
    ExperimentConfig c;
    c.command = command;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BETHESTRIP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, -2.5e-300, 1.0 / 3.0, 1e22, 123456789.0})
        CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("grid parsing") {
    const Grid g = Grid::parse("-2:2:5");
    CHECK(g.points() == std::vector<double>{-2, -1, 0, 1, 2});
    CHECK(Grid::parse(g.str()) == g);
    CHECK(Grid::parse("0.5:0.5:1").points() == std::vector<double>{0.5});
    CHECK_THROWS_AS(Grid::parse("0:1:0"), ConfigError);
    CHECK_THROWS_AS(Grid::parse("1:0:3"), ConfigError);
    CHECK_THROWS_AS(Grid::parse("0:1"), ConfigError);
    CHECK_THROWS_AS(Grid::parse("a:1:3"), ConfigError);
}

TEST_CASE("config emit and parse round-trip") {
    ExperimentConfig c = config("dos-scan");
    c.K = 3;
    c.m = 2;
    c.a = {-0.5, 0.25};
    c.lambda = 0.1;
    c.ensemble = "diag:uniform";
    c.energies = Grid{-1.5, 0.75, 7};
    c.etas = {0.1, 0.01, 0.001};
    c.pool = 1234;
    c.seed = 987654321987ull;
    c.workers = 3;
    c.out = "x.csv";
    CHECK(ExperimentConfig::from_kv(c.to_kv()) == c);

    auto kv = c.to_kv();
    kv["bogus"] = "1";
    CHECK_THROWS_AS(ExperimentConfig::from_kv(kv), ConfigError);
    kv = c.to_kv();
    kv.erase("A");
    CHECK(ExperimentConfig::from_kv(kv).a == std::vector<double>{0.0, 0.0});
}

TEST_CASE("config validation") {
    ExperimentConfig c = config("free-profile");
    CHECK_NOTHROW(c.validate());
    c.etas = {0.1, 0.2};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = config("free-profile");
    c.m = 2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = config("nope");
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = config("dos-scan");
    c.pool = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("free-profile") {
    ExperimentConfig c = config("free-profile");
    c.energies = Grid::parse("-2:2:5");
    c.etas = {0.0};
    const auto rows = parse_csv(run_command(c).csv);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0][3] == "im_G0_1");
    CHECK(std::abs(std::stod(rows[3][3]) - 1.414214) < 1e-6);

    c.m = 2;
    c.a = {-0.5, 0.5};
    const auto r2 = parse_csv(run_command(c).csv);
    CHECK(r2[0].size() == 1 + 1 + 4 * 2 + 2 * 2);
    for (const auto& row : r2) CHECK(row.size() == r2[0].size());
}

TEST_CASE("dos-scan at lambda = 0 matches the free density") {
    ExperimentConfig c = config("dos-scan");
    c.energies = Grid::parse("-1:1:5");
    c.etas = {1e-2, 1e-6};
    c.lambda = 0.0;
    c.pool = 10;
    c.sweeps = 1;
    c.burnin = 1;
    c.samples = 20;
    const auto rows = parse_csv(run_command(c).csv);
    REQUIRE(rows.size() == 11);
    ExperimentConfig f = config("free-profile");
    f.energies = c.energies;
    f.etas = {1e-6};
    const auto free = parse_csv(run_command(f).csv);
    for (int e = 0; e < 5; ++e) {
        const auto& row = rows[2 + 2 * e];
        CHECK(row[1] == "1e-06");
        CHECK(std::abs(std::stod(row[2]) - std::stod(free[1 + e][5]) / M_PI) < 1e-6);
    }
    CHECK(run_command(c).csv == run_command(c).csv);
}

TEST_CASE("gap-scan and ce-spectrum") {
    ExperimentConfig c = config("gap-scan");
    c.energies = Grid::parse("-2:2:5");
    const auto res = run_command(c);
    const auto rows = parse_csv(res.csv);
    REQUIRE(rows.size() == 4);
    CHECK(res.warnings["out_of_band_rows_skipped"] == 2);
    CHECK(std::abs(std::stod(rows[2][1]) - 0.5) < 1e-12);
    CHECK(std::abs(std::stod(rows[2][2]) - 0.5) < 1e-12);
    c.degree = 0;
    for (const auto& row : parse_csv(run_command(c).csv))
        if (row[0] != "E") CHECK(std::stod(row[1]) == doctest::Approx(1.0));

    ExperimentConfig s = config("ce-spectrum");
    s.energies = Grid::parse("0:0:1");
    const auto ce = parse_csv(run_command(s).csv);
    REQUIRE(ce.size() == 4);
    const double expect[3] = {1.0, -0.5, 0.25};
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(std::stod(ce[1 + k][3]) - expect[k]) < 1e-12);
        CHECK(std::abs(std::stod(ce[1 + k][5]) - std::stod(ce[1 + k][6])) < 1e-12);
        CHECK(std::stod(ce[1 + k][7]) < 1e-10);
    }
}

TEST_CASE("crosscheck report") {
    ExperimentConfig c = config("crosscheck");
    c.m = 2;
    c.a = {-0.5, 0.5};
    c.lambda = 0.5;
    c.depth = 4;
    c.samples = 20;
    c.energies = Grid::parse("0:0:1");
    c.etas = {0.05};
    auto r = run_command(c);
    CHECK(r.exit_code == 0);
    CHECK(r.report["pass"] == true);
    c.depth = 0;
    CHECK(run_command(c).report["pass"] == true);
    c.depth = 3;
    c.seed_offset = 1;
    r = run_command(c);
    CHECK(r.exit_code == 4);
    CHECK(r.report["pass"] == false);
}

TEST_CASE("ac-indicator needs three levels") {
    ExperimentConfig c = config("ac-indicator");
    c.etas = {0.1, 0.01};
    CHECK_THROWS_AS(run_command(c), ConfigError);
    c.etas = {0.1, 0.05, 0.02};
    c.lambda = 0.0;
    c.energies = Grid::parse("-0.5:0.5:3");
    c.pool = 10;
    c.sweeps = 1;
    c.burnin = 1;
    c.samples = 10;
    const auto r = run_command(c);
    CHECK(r.report["all_bounded"] == true);
}

TEST_CASE("run_experiment writes outputs and a manifest") {
    const auto dir = std::filesystem::temp_directory_path() / "bethestrip_unit";
    std::filesystem::create_directories(dir);
    ExperimentConfig c = config("gap-scan");
    c.out = (dir / "gap.csv").string();
    CHECK(run_experiment(c) == 0);
    const auto manifest = nlohmann::json::parse(slurp(dir / "gap.csv.manifest.json"));
    CHECK(manifest["command"] == "gap-scan");
    CHECK(manifest["version"] == BETHESTRIP_VERSION);
    CHECK(manifest["config"]["E-grid"] == "-1:1:5");
    const std::string digest = manifest["outputs"][c.out];
    std::ostringstream hex;
    hex << "fnv1a64:" << std::hex;
    hex.width(16);
    hex.fill('0');
    hex << fnv1a64(slurp(c.out));
    CHECK(digest == hex.str());

    c.command = "free-profile";
    c.energies = Grid::parse("2:3:2");
    c.etas = {0.5, 0.0};
    c.degree = 0;
    CHECK(run_experiment(c) == 0);
    c.K = 1;
    CHECK(run_experiment(c) == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli exit codes and flag precedence") {
    if (std::string(BETHESTRIP_CLI_PATH).empty()) return;
    const auto dir = std::filesystem::temp_directory_path() / "bethestrip_cli";
    std::filesystem::create_directories(dir);
    const std::string out = (dir / "p.csv").string();
    CHECK(run_cli("free-profile --E-grid -1:1:3 --eta-schedule 0 --out " + out) == 0);
    CHECK(run_cli("free-profile --E-grid 0:1:0") == 2);
    CHECK(run_cli("no-such-command") == 2);
    CHECK(run_cli("free-profile --E-grid 1.4142135623730951:1.4142135623730951:1 --eta-schedule 0") == 3);
    CHECK(run_cli("crosscheck --depth 2 --samples 2 --lambda 0.5 --E-grid 0:0:1 --eta-schedule 0.1 --seed-offset 3") ==
          4);

    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "# comment\nK = 3\nE-grid = -1:1:3\neta-schedule = 0\nout = " << out << "\n";
    }
    CHECK(run_cli("free-profile --config " + (dir / "run.cfg").string() + " --K 2") == 0);
    const auto manifest = nlohmann::json::parse(slurp(out + ".manifest.json"));
    CHECK(manifest["config"]["K"] == "2");
    CHECK(manifest["config"]["E-grid"] == "-1:1:3");
    std::filesystem::remove_all(dir);
}
