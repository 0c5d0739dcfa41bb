#include <CLI11.hpp>

#include <iostream>

#include "hj/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Viscosity solutions of contact Hamilton-Jacobi equations"};
    app.require_subcommand(1);
    hj::cli::Flags flags;
    std::string config;
    std::string out;
    std::string points;
    std::string dump;
    int threads = -1;

    for (const auto& name : hj::cli::commands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config,-c", config, "experiment config file")->required();
        sub->add_option("--out,-o", out, "output directory (overrides the config)");
        sub->add_option("--threads", threads, "worker threads (0: HJ_THREADS or hardware)");
        if (name == "compare-formulas") {
            sub->add_option("--points", points, "evaluation points \"t:x;t:x\" (2D: \"t:x1,x2\")");
        }
        if (name == "fundamental-solution") {
            sub->add_option_function<double>("--t1", [&](double v) { flags.t1 = v; }, "start time (default 0)");
            sub->add_option_function<double>("--t2", [&](double v) { flags.t2 = v; }, "end time");
            sub->add_option_function<std::string>("--x", [&](const std::string& v) { flags.x = v; },
                                                  "start point, comma separated")
                ->required();
            sub->add_option_function<std::string>("--y", [&](const std::string& v) { flags.y = v; },
                                                  "end point, comma separated")
                ->required();
            sub->add_option_function<double>("--u0", [&](double v) { flags.u0 = v; }, "initial value (default 0)");
            sub->add_flag("--json", flags.json, "append per-start diagnostics as JSON");
            sub->add_option("--dump-trajectory", dump, "write the minimizer trajectory CSV here");
        }
    }
    CLI11_PARSE(app, argc, argv);

    const CLI::App* chosen = app.get_subcommands().front();
    if (!out.empty()) flags.out = out;
    if (!points.empty()) flags.points = points;
    if (!dump.empty()) flags.dump_trajectory = dump;
    if (threads >= 0) flags.threads = threads;
    return hj::cli::run(chosen->get_name(), config, flags, std::cout, std::cerr);
}
