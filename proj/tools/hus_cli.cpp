#include "hus/hus.h"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

bool write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return static_cast<bool>(std::cout);
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
}

struct Context {
    hus_context* ctx = hus_context_create();
    ~Context() { hus_context_destroy(ctx); }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyers-Ulam stability constants, shadowing solver and scenario runner"};
    app.set_version_flag("--version", std::string(hus_version()));

    std::string command;
    std::string scenario;
    std::string config_path;
    std::string out_path;
    std::string format = "json";
    bool print_defaults = false;

    app.add_option("command", command, "constants | solve | scenario | sweep")
        ->check(CLI::IsMember({"constants", "solve", "scenario", "sweep"}));
    app.add_option("name", scenario,
                   "scenario name: sine, sharpness, pq_counterexample, 2d_minimal, unbounded_residual");
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", out_path, "write the report here instead of stdout");
    app.add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
    app.add_flag("--print-defaults", print_defaults, "print the default configuration and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : HUS_ERR_CONFIG;
    }

    Context c;
    if (!c.ctx) return HUS_ERR_INTERNAL;

    if (print_defaults) {
        const char* text = nullptr;
        const auto st = hus_default_config(c.ctx, command.empty() ? nullptr : command.c_str(),
                                           scenario.empty() ? nullptr : scenario.c_str(), &text);
        if (st != HUS_OK) {
            std::cerr << "error: " << hus_last_error(c.ctx) << "\n";
            return st;
        }
        return write_text(out_path, text) ? 0 : HUS_ERR_INTERNAL;
    }

    if (command.empty()) {
        std::cerr << "error: a command is required\n" << app.help();
        return HUS_ERR_CONFIG;
    }
    if (command != "scenario" && !scenario.empty()) {
        std::cerr << "error: unexpected argument '" << scenario << "'\n";
        return HUS_ERR_CONFIG;
    }

    std::string config;
    if (!config_path.empty()) {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) {
            std::cerr << "error: cannot read " << config_path << "\n";
            return HUS_ERR_CONFIG;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        config = buf.str();
    }

    hus_report* report = nullptr;
    const auto st = hus_run(c.ctx, command.c_str(), scenario.empty() ? nullptr : scenario.c_str(), config.c_str(),
                            format == "csv" ? HUS_FORMAT_CSV : HUS_FORMAT_JSON, &report);
    int rc = st;
    if (report) {
        if (!write_text(out_path, hus_report_text(report))) {
            std::cerr << "error: cannot write " << out_path << "\n";
            rc = HUS_ERR_INTERNAL;
        }
        hus_report_destroy(report);
    }
    if (st != HUS_OK) std::cerr << "error: " << hus_last_error(c.ctx) << "\n";
    return rc;
}
