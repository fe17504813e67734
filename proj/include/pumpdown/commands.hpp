#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pumpdown/config.hpp"

namespace pumpdown {

/// Stable process exit statuses shared by every subcommand.
constexpr int kExitOk = 0;
constexpr int kExitEmptyFront = 2;
constexpr int kExitConfigError = 3;
constexpr int kExitIoError = 4;

/// Map a library error onto the exit-status contract.
int exit_code_for(ErrorCode code);

/// Fixed results-directory layout, addressable by path.
struct RunPaths {
    std::string root;    // the output directory itself
    std::string db;      // root/db
    std::string fronts;  // root/fronts
    std::string tours;   // root/tours
    std::string map;     // root/map
    std::string log;     // root/run.log
};
RunPaths run_paths(const std::string& out_dir);

/// Parse a comma-separated moon list ("titan,rhea"); empty input selects all
/// five. Result is sorted outer-to-inner and deduplicated.
Result<std::vector<int>> parse_moon_list(const std::string& list);

/// Per-moon transfer-database file inside an output directory.
std::string database_path(const RunPaths& paths, int moon_idx, const SystemModel& sys);

/// Build (or reuse) databases and write one CSV per selected moon.
int cmd_gen_db(const RunConfig& cfg, const std::vector<int>& moons,
               const std::string& out_dir, std::ostream& console);

/// Run the full staged search: ensures databases exist (building missing
/// ones), reloads them from disk, checkpoints each phase boundary, resumes
/// from the newest checkpoint when one is present, and writes arrival
/// fronts, the final time/cost front, and per-tour flyby tables.
int cmd_tour(const RunConfig& cfg, const std::string& out_dir, std::ostream& console);

/// Write pump-angle map curves (and impulse tick annotations from the
/// database sensitivities) for the selected moons; optionally render SVG.
int cmd_map(const RunConfig& cfg, const std::vector<int>& moons, const std::string& out_dir,
            bool svg, std::ostream& console);

/// Format one stored tour as human-readable tables (per-moon sections plus
/// a summary). Accepts "7", "007" or "tour_007".
int cmd_report(const std::string& out_dir, const std::string& tour_id,
               std::ostream& console);

/// Determinism harness for --seedless: run the action into the directory and
/// into a sibling "<dir>_check", then byte-compare every artifact except
/// run.log. Returns the action's status, or kExitEmptyFront-compatible
/// nonzero when the trees differ.
int run_twice_and_diff(const std::function<int(const std::string&)>& action,
                       const std::string& out_dir, std::ostream& console);

}  // namespace pumpdown
