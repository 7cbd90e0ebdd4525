#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "carleman_lab/carleman_lab.hpp"

namespace fs = std::filesystem;
using namespace carleman_lab;

namespace {

json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

void write_artifacts(const ExperimentResult& res, const json& resolved, const fs::path& dir) {
    fs::create_directories(dir);
    json checks = json::array();
    for (const auto& c : res.checks)
        checks.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"measured", c.measured}});
    json report{{"experiment", res.experiment},
                {"config", resolved},
                {"checks", checks},
                {"results", res.report},
                {"generated_at", utc_timestamp()}};
    write_json(dir / (res.experiment + "_report.json"), report);
    for (const auto& [name, table] : res.tables) table.write(dir / (name + "_table.csv"));
    for (const auto& [name, field] : res.fields) write_field((dir / (name + ".bin")).string(), field);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"carleman-lab experiment driver"};
    std::string command, config_path;
    int threads = 0;
    bool print_schema = false;
    app.add_option("command", command, "run")->required();
    app.add_option("config", config_path, "experiment config (JSON)");
    app.add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
    app.add_flag("--print-schema", print_schema, "print the config schema and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (command != "run") {
        std::cerr << "unknown command '" << command << "'\n";
        return 2;
    }
    if (print_schema) {
        std::cout << schema_json().dump(2) << '\n';
        return 0;
    }
    if (config_path.empty()) {
        std::cerr << "run needs a config path\n";
        return 2;
    }
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    json resolved;
    try {
        resolved = resolve_config(load_config(config_path));
        if (const char* out = std::getenv("CARLEMAN_LAB_OUT")) resolved["output_dir"] = out;
        make_context(resolved);
    } catch (const LabError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    try {
        const auto res = run_experiment(resolved);
        write_artifacts(res, resolved, resolved["output_dir"].get<std::string>());
        for (const auto& c : res.checks)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.id << "  " << c.name << "  " << c.measured.dump() << '\n';
        return res.all_pass() ? 0 : 1;
    } catch (const LabError& e) {
        std::cout << (e.numerical_guard() ? "GUARD " : "ERROR ") << e.name() << ": " << e.what() << '\n';
        return e.numerical_guard() ? 3 : 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
}
