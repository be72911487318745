// Command-line front end for the degflow library.

#include "degflow/errors.hpp"
#include "degflow/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

void report_error(const nlohmann::json& err, const std::string& out_dir) {
    std::cout << err.dump(2) << '\n';
    if (out_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream os(out_dir + "/error.json");
    if (os) os << err.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    using degflow::Stage;

    CLI::App app{"degflow: gradient flows with degenerate spatial mobility"};
    app.require_subcommand(1, 1);

    std::string config_path, out_dir;
    bool quiet = false;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"analyze", "mobility checks and decay class"},
        {"transform", "tables of alpha, a and V"},
        {"convexity", "grid certification of lambda-convexity"},
        {"solve-jko", "minimizing movement scheme in quantile variables"},
        {"solve-fd", "finite-volume reference solver"},
        {"compare", "run both solvers and compare them"},
        {"run", "full pipeline following the config's solver field"},
        {"sweep", "parameter sweep, one subdirectory per value"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_flag("--quiet", quiet, "suppress progress messages");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    std::string effective_out = out_dir;
    try {
        auto cfg = degflow::load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        effective_out = cfg.out_dir;

        nlohmann::json report;
        if (cmd == "sweep") {
            report = degflow::run_sweep(cfg, 0, quiet);
        } else {
            Stage stage = Stage::Full;
            if (cmd == "analyze") stage = Stage::Analyze;
            else if (cmd == "transform") stage = Stage::Transform;
            else if (cmd == "convexity") stage = Stage::Convexity;
            else if (cmd == "solve-jko") stage = Stage::SolveJko;
            else if (cmd == "solve-fd") stage = Stage::SolveFd;
            else if (cmd == "compare") stage = Stage::Compare;
            report = degflow::run_experiment(cfg, stage, quiet);
        }
        if (cmd == "analyze" || cmd == "convexity") {
            std::cout << report.dump(2) << '\n';
        } else if (!quiet) {
            std::cerr << "wrote " << effective_out << "/" << (cmd == "sweep" ? "sweep.json" : "report.json") << '\n';
        }
        return 0;
    } catch (const degflow::ConfigError& e) {
        report_error(degflow::error_json(e.kind(), e.what()), effective_out);
        return 2;
    } catch (const degflow::Error& e) {
        report_error(degflow::error_json(e.kind(), e.what()), effective_out);
        return 1;
    } catch (const std::exception& e) {
        report_error(degflow::error_json("InternalError", e.what()), effective_out);
        return 3;
    }
}
