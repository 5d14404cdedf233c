// Command-line front end: run named experiments from a JSON config and write
// machine-readable reports.
//
// Exit codes: 0 all rows pass, 1 some row fails, 2 invalid config (nothing is
// written), 3 numeric failure (a partial report with failure rows is written).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "fraclap/experiments.hpp"

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok)
            throw fraclap::config_error("invalid-config",
                                        "unknown key \"" + key + "\" in " + where);
    }
}

std::vector<double> grid_field(const json& obj, const char* key) {
    if (!obj.contains(key)) return {};
    const json& v = obj.at(key);
    if (!v.is_array())
        throw fraclap::config_error("invalid-config", std::string(key) + " must be an array");
    std::vector<double> out;
    for (const json& e : v) {
        if (!e.is_number())
            throw fraclap::config_error("invalid-config", std::string(key) + " must be numeric");
        out.push_back(e.get<double>());
    }
    return out;
}

fraclap::ManifoldSpec parse_manifold(const json& obj) {
    reject_unknown(obj, {"kind", "radius", "periods"}, "manifold");
    const std::string kind = obj.value("kind", "circle");
    if (kind == "circle") {
        return fraclap::ManifoldSpec::circle(obj.value("radius", 1.0));
    } else if (kind == "torus") {
        std::vector<double> Ls = grid_field(obj, "periods");
        if (Ls.empty()) Ls = {2.0 * M_PI, 2.0 * M_PI};
        return fraclap::ManifoldSpec::flat_torus(std::move(Ls));
    } else if (kind == "sphere") {
        return fraclap::ManifoldSpec::sphere(obj.value("radius", 1.0));
    }
    throw fraclap::config_error("invalid-config", "unknown manifold kind \"" + kind + "\"");
}

fraclap::ExperimentConfig parse_config(const std::string& path, const std::string& name) {
    std::ifstream in(path);
    if (!in) throw fraclap::config_error("invalid-config", "cannot open config " + path);
    json obj;
    try {
        obj = json::parse(in);
    } catch (const json::parse_error& e) {
        throw fraclap::config_error("invalid-config", std::string("config parse: ") + e.what());
    }
    reject_unknown(obj,
                   {"experiment", "manifold", "s_values", "p_values", "q_values", "eps_values",
                    "t_values", "truncation", "order", "trials", "seed", "out", "format",
                    "threads"},
                   "config");

    fraclap::ExperimentConfig cfg;
    cfg.experiment = obj.value("experiment", name);
    if (cfg.experiment != name)
        throw fraclap::config_error("invalid-config", "config names experiment \"" +
                                                          cfg.experiment +
                                                          "\" but the command asked for \"" +
                                                          name + "\"");
    if (obj.contains("manifold")) cfg.manifold = parse_manifold(obj.at("manifold"));
    cfg.s_values = grid_field(obj, "s_values");
    cfg.p_values = grid_field(obj, "p_values");
    cfg.q_values = grid_field(obj, "q_values");
    cfg.eps_values = grid_field(obj, "eps_values");
    cfg.t_values = grid_field(obj, "t_values");
    cfg.truncation = obj.value("truncation", 12);
    cfg.order = obj.value("order", 0);
    cfg.trials = obj.value("trials", 0);
    cfg.seed = obj.value("seed", std::uint64_t(1));
    cfg.out_path = obj.value("out", std::string());
    cfg.threads = obj.value("threads", 0);
    const std::string fmt = obj.value("format", "csv");
    if (fmt == "csv")
        cfg.fmt = fraclap::report_format::csv;
    else if (fmt == "json")
        cfg.fmt = fraclap::report_format::json;
    else
        throw fraclap::config_error("invalid-config", "format must be csv or json");
    if (cfg.truncation < 1 || cfg.order < 0 || cfg.trials < 0 || cfg.threads < 0)
        throw fraclap::config_error("invalid-config", "counts must be non-negative");
    return cfg;
}

int run_command(const std::string& name, const std::string& config_path,
                const std::string& out_override, const std::string& fmt_override,
                int threads_override) {
    fraclap::ExperimentConfig cfg = parse_config(config_path, name);
    if (!out_override.empty()) cfg.out_path = out_override;
    if (!fmt_override.empty()) {
        if (fmt_override == "csv")
            cfg.fmt = fraclap::report_format::csv;
        else if (fmt_override == "json")
            cfg.fmt = fraclap::report_format::json;
        else
            throw fraclap::config_error("invalid-config", "format must be csv or json");
    }
    if (threads_override > 0) cfg.threads = threads_override;
    if (cfg.out_path.empty())
        cfg.out_path = cfg.experiment + "-report." +
                       (cfg.fmt == fraclap::report_format::csv ? "csv" : "json");

    const fraclap::RunReport rep = fraclap::run_experiment(cfg);
    const std::string text = cfg.fmt == fraclap::report_format::csv ? fraclap::report_csv(rep)
                                                                    : fraclap::report_json(rep);
    std::ofstream out(cfg.out_path);
    if (!out) throw fraclap::config_error("invalid-config", "cannot write " + cfg.out_path);
    out << text;
    out.close();

    std::size_t passed = 0;
    for (const auto& r : rep.rows) passed += r.pass ? 1 : 0;
    std::fprintf(stderr, "%s: %zu/%zu rows pass, report %s\n", cfg.experiment.c_str(), passed,
                 rep.rows.size(), cfg.out_path.c_str());
    if (rep.numeric_failure) return 3;
    return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic numerical experiments on compact model manifolds"};
    app.require_subcommand(1);

    std::string name, config_path, out_override, fmt_override;
    int threads_override = 0;
    CLI::App* run = app.add_subcommand("run", "run one experiment from a JSON config");
    run->add_option("name", name, "experiment name (see: list)")->required();
    run->add_option("--config", config_path, "JSON config path")->required();
    run->add_option("--out", out_override, "report path (overrides config)");
    run->add_option("--format", fmt_override, "csv or json (overrides config)");
    run->add_option("--threads", threads_override, "worker threads (overrides config and env)");

    CLI::App* list = app.add_subcommand("list", "list available experiments");
    CLI::App* version = app.add_subcommand("version", "print the library version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return run_command(name, config_path, out_override, fmt_override,
                                              threads_override);
        if (list->parsed()) {
            for (const auto& [n, desc] : fraclap::list_experiments())
                std::printf("%-18s %s\n", n.c_str(), desc.c_str());
            return 0;
        }
        if (version->parsed()) {
            std::printf("fraclap %s\n", fraclap::version_string);
            return 0;
        }
    } catch (const fraclap::config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const fraclap::numeric_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
