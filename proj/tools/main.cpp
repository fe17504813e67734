#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pumpdown/commands.hpp"
#include "pumpdown/config.hpp"

namespace {

/// --out flag > explicit config value > PUMPDOWN_OUT > built-in default.
std::string resolve_out_dir(const pumpdown::RunConfig& cfg, const std::string& out_flag) {
    if (!out_flag.empty()) return out_flag;
    if (cfg.out_dir != pumpdown::RunConfig{}.out_dir) return cfg.out_dir;
    if (const char* env = std::getenv("PUMPDOWN_OUT"); env != nullptr && *env != '\0')
        return env;
    return cfg.out_dir;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace pumpdown;

    CLI::App app{
        "Design gravity-assisted pump-down tours of Saturn's large moons:\n"
        "build resonant-transfer databases, run the staged multi-objective\n"
        "search, and export Pareto fronts, flyby tables and pump-angle maps."};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_flag;
    int workers = 0;
    bool seedless = false;
    app.add_option("--config", config_path, "JSON configuration file (defaults when omitted)");
    app.add_option("--out", out_flag,
                   "output directory (overrides the config and PUMPDOWN_OUT)");
    app.add_option("--workers", workers, "worker thread count override");
    app.add_flag("--seedless", seedless,
                 "run the action twice and require byte-identical artifacts");

    std::string gen_list;
    auto* gen = app.add_subcommand("gen-db", "build and persist transfer databases");
    gen->add_option("--moons", gen_list, "comma-separated moon subset (default: all five)");

    auto* tour = app.add_subcommand("tour", "run the staged tour search end to end");

    std::string map_list;
    bool svg = false;
    auto* map = app.add_subcommand("map", "export pump-angle map curves and tick marks");
    map->add_option("--moons", map_list, "comma-separated moon subset (default: all five)");
    map->add_flag("--svg", svg, "also render an SVG plot per moon");

    std::string tour_id;
    auto* report = app.add_subcommand("report", "print one stored tour as tables");
    report->add_option("--tour,tour", tour_id, "tour id: 7, 007 or tour_007")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help and friends
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    RunConfig cfg;
    if (!config_path.empty()) {
        auto loaded = load_config(config_path);
        if (!loaded.ok()) {
            std::cerr << loaded.message() << '\n';
            return exit_code_for(loaded.error());
        }
        cfg = *loaded;
    }
    if (workers > 0) cfg.workers = workers;

    std::vector<int> gen_moons, map_moons;
    if (gen->parsed()) {
        auto r = parse_moon_list(gen_list);
        if (!r.ok()) {
            std::cerr << r.message() << '\n';
            return exit_code_for(r.error());
        }
        gen_moons = *r;
    }
    if (map->parsed()) {
        auto r = parse_moon_list(map_list);
        if (!r.ok()) {
            std::cerr << r.message() << '\n';
            return exit_code_for(r.error());
        }
        map_moons = *r;
    }

    const std::string out_dir = resolve_out_dir(cfg, out_flag);
    const auto action = [&](const std::string& dir) -> int {
        if (gen->parsed()) return cmd_gen_db(cfg, gen_moons, dir, std::cout);
        if (tour->parsed()) return cmd_tour(cfg, dir, std::cout);
        if (map->parsed()) return cmd_map(cfg, map_moons, dir, svg, std::cout);
        if (report->parsed()) return cmd_report(dir, tour_id, std::cout);
        return kExitConfigError;
    };

    if (seedless && !report->parsed()) return run_twice_and_diff(action, out_dir, std::cout);
    return action(out_dir);
}
