#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fraclap/experiments.hpp"

using namespace fraclap;

namespace {

#ifdef FRACLAP_CLI_PATH
const char* cli_path = FRACLAP_CLI_PATH;
#else
const char* cli_path = nullptr;
#endif

int run_cli(const std::string& args) {
    REQUIRE(cli_path != nullptr);
    const std::string cmd = std::string(cli_path) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

void fresh_dir(const std::string& dir) {
    const int rc = std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str());
    REQUIRE(rc == 0);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

}  // namespace

TEST_CASE("experiment registry is complete and sorted") {
    const auto reg = list_experiments();
    REQUIRE(reg.size() == 18);
    const std::vector<std::string> expected{
        "bakry",         "beta-program", "bubbles",   "counterexample", "dtn",
        "embedding",     "euclid-kernel", "frac-agreement", "gaussian-bounds", "heat-mass",
        "kernel-bounds", "longtime",     "minimize-quotient", "orthogonality", "poincare",
        "s-limits",      "semigroup",    "subcritical-split"};
    for (std::size_t i = 0; i < reg.size(); ++i) {
        CHECK(reg[i].first == expected[i]);
        CHECK(!reg[i].second.empty());
        if (i > 0) CHECK(reg[i - 1].first < reg[i].first);
    }
}

TEST_CASE("unknown experiments are rejected") {
    ExperimentConfig cfg;
    cfg.experiment = "does-not-exist";
    CHECK_THROWS_AS(run_experiment(cfg), config_error);
}

TEST_CASE("rows follow the grid order and pass deterministically") {
    ExperimentConfig cfg;
    cfg.experiment = "semigroup";
    const RunReport rep = run_experiment(cfg);
    REQUIRE(rep.rows.size() == 9);
    CHECK(rep.all_pass());
    CHECK(!rep.numeric_failure);
    // s-major, then eigenvalue order
    CHECK(rep.rows[0].s == 0.25);
    CHECK(rep.rows[0].q == 1.0);
    CHECK(rep.rows[1].q == 4.0);
    CHECK(rep.rows[3].s == 0.5);

    const RunReport rep2 = run_experiment(cfg);
    CHECK(report_body(rep, cfg.fmt) == report_body(rep2, cfg.fmt));
    CHECK(report_body(rep, report_format::json) == report_body(rep2, report_format::json));
}

TEST_CASE("report serialization carries the full schema") {
    ExperimentConfig cfg;
    cfg.experiment = "heat-mass";
    cfg.t_values = {0.5};
    const RunReport rep = run_experiment(cfg);
    const std::string csv = report_csv(rep);
    CHECK(csv.rfind("# fraclap", 0) == 0);  // metadata line leads
    std::istringstream ss(csv);
    std::string meta, header, row;
    std::getline(ss, meta);
    std::getline(ss, header);
    std::getline(ss, row);
    CHECK(header ==
          "experiment,manifold,s,p,q,extra-params,lhs,rhs,deficit,err_est,pass");
    // 11 columns in the data row
    CHECK(std::count(row.begin(), row.end(), ',') == 10);
    CHECK(row.rfind("heat-mass,circle,", 0) == 0);
    CHECK(row.find(",true") != std::string::npos);

    const std::string js = report_json(rep);
    CHECK(js.find("\"header\"") != std::string::npos);
    CHECK(js.find("\"body\"") != std::string::npos);
    CHECK(js.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("doubles are printed with 17 significant digits") {
    CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
    CHECK(format_double(2.0 * M_PI) == "6.2831853071795862");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("numeric failures produce failure rows, not aborts") {
    ExperimentConfig cfg;
    cfg.experiment = "poincare";
    cfg.truncation = 1;  // only the constant mode: oscillation ratio is undefined
    const RunReport rep = run_experiment(cfg);
    CHECK(rep.numeric_failure);
    REQUIRE(!rep.rows.empty());
    CHECK(!rep.rows.back().pass);
    CHECK(rep.rows.back().extra.find("error=") != std::string::npos);
}

TEST_CASE("cli runs an experiment end to end") {
    const std::string dir = "cli_scratch";
    fresh_dir(dir);
    write_file(dir + "/ok.json", R"({
        "manifold": {"kind": "circle", "radius": 1.0},
        "s_values": [0.3], "q_values": [1.0, 4.0],
        "out": ")" + dir + R"(/report.csv"
    })");
    CHECK(run_cli("run semigroup --config " + dir + "/ok.json") == 0);
    REQUIRE(file_exists(dir + "/report.csv"));
    const std::string body = read_file(dir + "/report.csv");
    CHECK(body.find("semigroup,circle,") != std::string::npos);

    // byte-identical bodies on repeated runs (metadata line stripped), and the
    // worker count must not affect report content
    (void)run_cli("run semigroup --config " + dir + "/ok.json --out " + dir +
                  "/rep2.csv --threads 2");
    const auto strip = [](const std::string& text) {
        return text.substr(text.find('\n') + 1);
    };
    CHECK(strip(read_file(dir + "/report.csv")) == strip(read_file(dir + "/rep2.csv")));

    // json format override
    CHECK(run_cli("run semigroup --config " + dir + "/ok.json --out " + dir +
                  "/rep.json --format json") == 0);
    CHECK(read_file(dir + "/rep.json").find("\"rows\"") != std::string::npos);
}

TEST_CASE("cli rejects bad configs without writing output") {
    const std::string dir = "cli_scratch2";
    fresh_dir(dir);

    write_file(dir + "/unknown_key.json",
               R"({"s_values": [0.3], "wavelength": 7, "out": ")" + dir + R"(/a.csv"})");
    CHECK(run_cli("run semigroup --config " + dir + "/unknown_key.json") == 2);
    CHECK(!file_exists(dir + "/a.csv"));

    write_file(dir + "/bad_fmt.json", R"({"format": "xml", "out": ")" + dir + R"(/b.csv"})");
    CHECK(run_cli("run semigroup --config " + dir + "/bad_fmt.json") == 2);
    CHECK(!file_exists(dir + "/b.csv"));

    write_file(dir + "/ok.json", R"({"out": ")" + dir + R"(/c.csv"})");
    CHECK(run_cli("run no-such-experiment --config " + dir + "/ok.json") == 2);
    CHECK(!file_exists(dir + "/c.csv"));

    write_file(dir + "/mismatch.json",
               R"({"experiment": "dtn", "out": ")" + dir + R"(/d.csv"})");
    CHECK(run_cli("run semigroup --config " + dir + "/mismatch.json") == 2);
    CHECK(!file_exists(dir + "/d.csv"));

    write_file(dir + "/bad_manifold.json",
               R"({"manifold": {"kind": "moebius"}, "out": ")" + dir + R"(/e.csv"})");
    CHECK(run_cli("run semigroup --config " + dir + "/bad_manifold.json") == 2);
    CHECK(!file_exists(dir + "/e.csv"));

    write_file(dir + "/syntax.json", "{not json");
    CHECK(run_cli("run semigroup --config " + dir + "/syntax.json") == 2);
    CHECK(run_cli("run semigroup --config " + dir + "/no_such_file.json") == 2);
}

TEST_CASE("cli reports numeric failures with a partial report") {
    const std::string dir = "cli_scratch3";
    fresh_dir(dir);
    write_file(dir + "/fail.json",
               R"({"truncation": 1, "out": ")" + dir + R"(/fail.csv"})");
    CHECK(run_cli("run poincare --config " + dir + "/fail.json") == 3);
    REQUIRE(file_exists(dir + "/fail.csv"));
    CHECK(read_file(dir + "/fail.csv").find("error=coincident-points") != std::string::npos);
}

TEST_CASE("cli list and version") {
    REQUIRE(cli_path != nullptr);
    {
        const std::string cmd = std::string(cli_path) + " list > cli_list.txt 2>&1";
        REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
        const std::string out = read_file("cli_list.txt");
        CHECK(out.find("semigroup") != std::string::npos);
        CHECK(out.find("beta-program") != std::string::npos);
        CHECK(out.find("counterexample") != std::string::npos);
    }
    {
        const std::string cmd = std::string(cli_path) + " version > cli_version.txt 2>&1";
        REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
        CHECK(read_file("cli_version.txt").find(version_string) != std::string::npos);
    }
    CHECK(run_cli("run") == 2);       // missing required arguments
    CHECK(run_cli("frobnicate") == 2);
}
