#include "pumpdown/commands.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pumpdown/csv.hpp"
#include "pumpdown/pathfinder.hpp"
#include "pumpdown/resonance.hpp"
#include "pumpdown/svg.hpp"
#include "pumpdown/vilt.hpp"

namespace fs = std::filesystem;

namespace pumpdown {

namespace {

std::string lower_copy(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string moon_stem(const SystemModel& sys, int idx) {
    return lower_copy(sys.moon(idx).name);
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

/// Console + run.log tee. The log file is append-mode so resumed runs keep
/// their history; it is excluded from determinism comparisons.
class RunLog {
  public:
    RunLog(const std::string& path, std::ostream& console) : console_(console) {
        file_.open(path, std::ios::app);
    }
    void line(const std::string& text) {
        console_ << text << '\n';
        if (file_.is_open()) {
            file_ << text << '\n';
            file_.flush();
        }
    }

  private:
    std::ofstream file_;
    std::ostream& console_;
};

Result<bool> ensure_dirs(const RunPaths& p) {
    for (const std::string* d : {&p.root, &p.db, &p.fronts, &p.tours, &p.map}) {
        std::error_code ec;
        fs::create_directories(*d, ec);
        if (ec)
            return Result<bool>(ErrorCode::IoError,
                                "cannot create directory " + *d + ": " + ec.message());
    }
    return Result<bool>(true);
}

Result<std::string> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return Result<std::string>(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return Result<std::string>(ss.str());
}

std::string build_stats_line(const std::string& stem, const BuildStats& st,
                             const std::string& path) {
    return stem + ": families=" + std::to_string(st.families) +
           " grid_points=" + std::to_string(st.grid_points) +
           " records=" + std::to_string(st.records) +
           " infeasible=" + std::to_string(st.infeasible) +
           " dropped=" + std::to_string(st.dropped) + " -> " + path;
}

/// Build one moon's table and persist it under the fixed layout.
Result<MoonTable> build_and_write_db(const RunConfig& cfg, const SystemModel& sys, int m,
                                     const RunPaths& paths, RunLog& log) {
    BuildStats st;
    MoonTable table =
        build_moon_table(sys.moon(m), sys, cfg.windows[static_cast<size_t>(m)],
                         cfg.db_grid_step_mps, cfg.workers, &st);
    const std::string path = database_path(paths, m, sys);
    std::ofstream f(path, std::ios::binary);
    if (!f) return Result<MoonTable>(ErrorCode::IoError, "cannot open " + path + " for writing");
    write_moon_table_csv(f, table, sys);
    f.flush();
    if (!f) return Result<MoonTable>(ErrorCode::IoError, "write failed: " + path);
    log.line(build_stats_line(moon_stem(sys, m), st, path));
    return Result<MoonTable>(std::move(table));
}

/// Arrival front at one moon: cumulative cost/time plus the arrival state.
Result<bool> write_front_csv(const std::string& path, const NodePool& pool,
                             const std::vector<std::int32_t>& ids) {
    std::ofstream f(path, std::ios::binary);
    if (!f) return Result<bool>(ErrorCode::IoError, "cannot open " + path + " for writing");
    f << "dv_mps,tof_days,alpha_deg,vinf_mps\n";
    for (std::int32_t id : ids) {
        const PathNode& n = pool[static_cast<size_t>(id)];
        f << format_sig12(n.dv_mps) << ',' << format_sig12(n.tof_days) << ','
          << format_sig12(n.alpha_deg) << ',' << format_sig12(n.vinf_mps) << '\n';
    }
    f.flush();
    if (!f) return Result<bool>(ErrorCode::IoError, "write failed: " + path);
    return Result<bool>(true);
}

std::string tour_name(size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "tour_%03zu", index);
    return buf;
}

Result<bool> write_tour_files(const RunPaths& paths, const std::string& name,
                              const TourRecord& rec, const SystemModel& sys) {
    const std::string table_path = paths.tours + "/" + name + ".csv";
    {
        std::ofstream f(table_path, std::ios::binary);
        if (!f)
            return Result<bool>(ErrorCode::IoError, "cannot open " + table_path + " for writing");
        f << "moon,flyby,type,tof_days,alt_km,vinf_mps,dv_mps\n";
        for (const FlybyRow& r : rec.rows) {
            f << sys.moon(r.moon_idx).name << ',' << r.flyby_index << ',' << csv_quote(r.type)
              << ',';
            if (r.has_tof) f << format_sig12(r.tof_days);
            f << ',' << format_sig12(r.alt_km) << ',' << format_sig12(r.vinf_mps) << ',';
            if (r.has_dv) f << format_sig12(r.dv_mps);
            f << '\n';
        }
        f.flush();
        if (!f) return Result<bool>(ErrorCode::IoError, "write failed: " + table_path);
    }
    const std::string summary_path = paths.tours + "/" + name + "_summary.csv";
    std::ofstream f(summary_path, std::ios::binary);
    if (!f)
        return Result<bool>(ErrorCode::IoError, "cannot open " + summary_path + " for writing");
    f << "section,tof_days,dv_mps\n";
    for (int m = 0; m < kMoonCount; ++m)
        f << sys.moon(m).name << ',' << format_sig12(rec.moon_tof_days[static_cast<size_t>(m)])
          << ',' << format_sig12(rec.moon_dv_mps[static_cast<size_t>(m)]) << '\n';
    f << "EOI,," << format_sig12(rec.eoi_dv_mps) << '\n';
    f << "Total," << format_sig12(rec.total_tof_days) << ','
      << format_sig12(rec.total_dv_mps) << '\n';
    f.flush();
    if (!f) return Result<bool>(ErrorCode::IoError, "write failed: " + summary_path);
    return Result<bool>(true);
}

/// "7", "007" and "tour_007" all name the same stored tour.
Result<std::string> canonical_tour_name(const std::string& id) {
    std::string s = id;
    const std::string prefix = "tour_";
    if (s.rfind(prefix, 0) == 0) s = s.substr(prefix.size());
    if (s.empty() || s.size() > 6 ||
        !std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; }))
        return Result<std::string>(ErrorCode::ValidationError,
                                   "tour id must be a number or tour_NNN, got '" + id + "'");
    return Result<std::string>(tour_name(static_cast<size_t>(std::stol(s))));
}

double parse_or(const std::string& field, double fallback) {
    auto r = parse_double(field);
    return r.ok() ? *r : fallback;
}

/// Step size that lands axis ticks on round numbers (1/2/5 times a power
/// of ten, about six intervals across the span).
double nice_tick(double span) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    const double step = frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0;
    return step * mag;
}

const std::array<const char*, 10> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
};

}  // namespace

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::None:
            return kExitOk;
        case ErrorCode::EmptyFront:
            return kExitEmptyFront;
        case ErrorCode::IoError:
        case ErrorCode::UnknownTourId:
            return kExitIoError;
        default:
            return kExitConfigError;
    }
}

RunPaths run_paths(const std::string& out_dir) {
    RunPaths p;
    p.root = out_dir;
    p.db = out_dir + "/db";
    p.fronts = out_dir + "/fronts";
    p.tours = out_dir + "/tours";
    p.map = out_dir + "/map";
    p.log = out_dir + "/run.log";
    return p;
}

Result<std::vector<int>> parse_moon_list(const std::string& list) {
    std::vector<int> out;
    std::stringstream ss(list);
    std::string token;
    while (std::getline(ss, token, ',')) {
        const auto b = token.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = token.find_last_not_of(" \t");
        token = token.substr(b, e - b + 1);
        const int idx = moon_index(token);
        if (idx < 0)
            return Result<std::vector<int>>(ErrorCode::ValidationError,
                                            "unknown moon '" + token + "'");
        out.push_back(idx);
    }
    if (out.empty())
        for (int m = 0; m < kMoonCount; ++m) out.push_back(m);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return Result<std::vector<int>>(std::move(out));
}

std::string database_path(const RunPaths& paths, int moon_idx, const SystemModel& sys) {
    return paths.db + "/" + moon_stem(sys, moon_idx) + ".csv";
}

int cmd_gen_db(const RunConfig& cfg, const std::vector<int>& moons,
               const std::string& out_dir, std::ostream& console) {
    const RunPaths paths = run_paths(out_dir);
    if (auto ok = ensure_dirs(paths); !ok.ok()) {
        console << ok.message() << '\n';
        return exit_code_for(ok.error());
    }
    RunLog log(paths.log, console);
    if (auto ok = validate_config(cfg); !ok.ok()) {
        log.line("config error: " + ok.message());
        return exit_code_for(ok.error());
    }
    const SystemModel sys = system_model(cfg);
    log.line("gen-db: grid step " + num(cfg.db_grid_step_mps) + " m/s, workers " +
             std::to_string(cfg.workers));
    for (int m : moons) {
        auto table = build_and_write_db(cfg, sys, m, paths, log);
        if (!table.ok()) {
            log.line(table.message());
            return exit_code_for(table.error());
        }
    }
    return kExitOk;
}

int cmd_tour(const RunConfig& cfg, const std::string& out_dir, std::ostream& console) {
    const RunPaths paths = run_paths(out_dir);
    if (auto ok = ensure_dirs(paths); !ok.ok()) {
        console << ok.message() << '\n';
        return exit_code_for(ok.error());
    }
    RunLog log(paths.log, console);
    if (auto ok = validate_config(cfg); !ok.ok()) {
        log.line("config error: " + ok.message());
        return exit_code_for(ok.error());
    }
    const SystemModel sys = system_model(cfg);
    auto parres = search_params(cfg);
    if (!parres.ok()) {
        log.line("config error: " + parres.message());
        return exit_code_for(parres.error());
    }
    const SearchParams par = *parres;
    const int start = par.start_moon_idx;

    // Make sure every phase of the chain has a persisted database, then run
    // the search against the on-disk copies so results never depend on
    // whether this invocation or an earlier one built them.
    ViltDatabase db;
    db.moons.resize(kMoonCount);
    for (int m = 0; m < kMoonCount; ++m) db.moons[static_cast<size_t>(m)].moon_idx = m;
    for (int m = start; m < kMoonCount; ++m) {
        const std::string path = database_path(paths, m, sys);
        if (!fs::exists(path)) {
            log.line("building transfer database for " + moon_stem(sys, m));
            if (auto built = build_and_write_db(cfg, sys, m, paths, log); !built.ok()) {
                log.line(built.message());
                return exit_code_for(built.error());
            }
        }
        std::ifstream f(path);
        if (!f) {
            log.line("cannot read " + path);
            return kExitIoError;
        }
        auto loaded = read_database_csv(f, sys);
        if (!loaded.ok()) {
            log.line("database " + path + ": " + loaded.message());
            return exit_code_for(loaded.error());
        }
        db.moons[static_cast<size_t>(m)] = std::move(loaded->moons[static_cast<size_t>(m)]);
        const MoonTable& t = db.moons[static_cast<size_t>(m)];
        if (t.families.empty()) {
            log.line("database " + path + " has no records for " + moon_stem(sys, m));
            return kExitConfigError;
        }
        log.line("database " + moon_stem(sys, m) + ": " + std::to_string(t.families.size()) +
                 " families, " + std::to_string(t.grid_mps.size()) + " grid points");
    }

    // Resume from the newest phase checkpoint when one is present.
    PhaseState resume_state;
    const PhaseState* resume = nullptr;
    {
        int best_idx = -1;
        std::string best_path;
        if (fs::exists(paths.tours))
            for (const auto& entry : fs::directory_iterator(paths.tours)) {
                if (!entry.is_regular_file()) continue;
                const std::string name = entry.path().filename().string();
                int idx = -1;
                if (std::sscanf(name.c_str(), "checkpoint_%d_", &idx) != 1) continue;
                if (idx > best_idx && idx < kMoonCount) {
                    best_idx = idx;
                    best_path = entry.path().string();
                }
            }
        if (best_idx >= 0) {
            auto cp = read_checkpoint_csv(best_path);
            if (!cp.ok()) {
                log.line("checkpoint " + best_path + ": " + cp.message());
                return exit_code_for(cp.error());
            }
            resume_state.pool = std::move(cp->pool);
            resume_state.archive = std::move(cp->archive);
            resume_state.moon_idx = best_idx;
            resume = &resume_state;
            log.line("resuming from " + best_path + ": phase " + moon_stem(sys, best_idx) +
                     ", " + std::to_string(resume_state.pool.size()) + " nodes, " +
                     std::to_string(resume_state.archive.size()) + " front states");
        }
    }

    const DiagSink diag = [&](const StageDiag& d) {
        log.line("phase " + moon_stem(sys, d.moon_idx) + " stage " + std::to_string(d.stage) +
                 ": archive=" + std::to_string(d.archive_size) +
                 " harvested=" + std::to_string(d.harvested));
    };
    // Each phase boundary persists both the resume state and the arrival
    // front it corresponds to, so an interrupted run leaves usable artifacts.
    const PhaseSink after_phase = [&](const PhaseState& st) {
        const std::string stem = moon_stem(sys, st.moon_idx);
        const std::string cp_path =
            paths.tours + "/checkpoint_" + std::to_string(st.moon_idx) + "_" + stem + ".csv";
        if (auto w = write_checkpoint_csv(cp_path, st.pool, st.archive, {}); w.ok())
            log.line("checkpoint -> " + cp_path);
        else
            log.line("checkpoint failed (" + w.message() + "), continuing");
        const std::string front_path = paths.fronts + "/arrival_" + stem + ".csv";
        if (auto w = write_front_csv(front_path, st.pool, st.archive); w.ok())
            log.line("front " + stem + ": " + std::to_string(st.archive.size()) +
                     " states -> " + front_path);
        else
            log.line(w.message());
    };

    auto run = run_full_tour(db, sys, par, diag, after_phase, resume);
    if (!run.ok()) {
        log.line("search: " + run.message());
        return exit_code_for(run.error());
    }

    for (const MoonFront& front : run->fronts) {
        const std::string path =
            paths.fronts + "/arrival_" + moon_stem(sys, front.moon_idx) + ".csv";
        if (auto w = write_front_csv(path, run->pool, front.node_ids); !w.ok()) {
            log.line(w.message());
            return exit_code_for(w.error());
        }
    }

    {
        const std::string path = paths.fronts + "/final_2d.csv";
        std::ofstream f(path, std::ios::binary);
        if (!f) {
            log.line("cannot open " + path + " for writing");
            return kExitIoError;
        }
        f << "tour_id,tof_days,dv_mps,eoi_dv_mps,terminal_vinf_mps\n";
        for (size_t i = 0; i < run->completed.size(); ++i) {
            const CompletedTour& t = run->completed[i];
            f << tour_name(i) << ',' << format_sig12(t.tof_days) << ','
              << format_sig12(t.dv_mps) << ',' << format_sig12(t.eoi_dv_mps) << ','
              << format_sig12(t.terminal_vinf_mps) << '\n';
        }
        f.flush();
        if (!f) {
            log.line("write failed: " + path);
            return kExitIoError;
        }
        log.line("final front: " + std::to_string(run->completed.size()) + " tours (of " +
                 std::to_string(run->completed_total) + " closures) -> " + path);
    }

    for (size_t i = 0; i < run->completed.size(); ++i) {
        auto rec = reconstruct_tour(run->pool, run->completed[i], sys, par);
        if (!rec.ok()) {
            log.line(tour_name(i) + ": " + rec.message());
            return exit_code_for(rec.error());
        }
        if (auto w = write_tour_files(paths, tour_name(i), *rec, sys); !w.ok()) {
            log.line(w.message());
            return exit_code_for(w.error());
        }
    }
    log.line("flyby tables: " + std::to_string(run->completed.size()) + " tours -> " +
             paths.tours);

    if (fs::exists(paths.tours))
        for (const auto& entry : fs::directory_iterator(paths.tours)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("checkpoint_", 0) != 0) continue;
            std::error_code ec;
            fs::remove(entry.path(), ec);
            if (!ec) log.line("removed " + entry.path().string());
        }
    return kExitOk;
}

int cmd_map(const RunConfig& cfg, const std::vector<int>& moons, const std::string& out_dir,
            bool svg, std::ostream& console) {
    const RunPaths paths = run_paths(out_dir);
    if (auto ok = ensure_dirs(paths); !ok.ok()) {
        console << ok.message() << '\n';
        return exit_code_for(ok.error());
    }
    RunLog log(paths.log, console);
    if (auto ok = validate_config(cfg); !ok.ok()) {
        log.line("config error: " + ok.message());
        return exit_code_for(ok.error());
    }
    const SystemModel sys = system_model(cfg);
    for (int m : moons) {
        const VinfWindow& window = cfg.windows[static_cast<size_t>(m)];
        const std::string stem = moon_stem(sys, m);

        // Both the curve family set and the tick sensitivities come from the
        // transfer database: reuse a persisted one, otherwise build it.
        MoonTable table;
        const std::string dbp = database_path(paths, m, sys);
        if (fs::exists(dbp)) {
            std::ifstream f(dbp);
            auto loaded = f ? read_database_csv(f, sys)
                            : Result<ViltDatabase>(ErrorCode::IoError, "cannot read " + dbp);
            if (!loaded.ok()) {
                log.line("database " + dbp + ": " + loaded.message());
                return exit_code_for(loaded.error());
            }
            table = std::move(loaded->moons[static_cast<size_t>(m)]);
        } else {
            log.line("building transfer database for " + stem);
            auto built = build_and_write_db(cfg, sys, m, paths, log);
            if (!built.ok()) {
                log.line(built.message());
                return exit_code_for(built.error());
            }
            table = std::move(*built);
        }

        std::vector<ResonanceFamily> families;
        families.reserve(table.families.size());
        for (const auto& fr : table.families) families.push_back(fr.family);
        const auto grid = branch_targets(window, cfg.db_grid_step_mps);
        const auto samples = sample_pump_vinf_map(sys.moon(m), sys, families, grid);

        const std::string map_path = paths.map + "/" + stem + "_map.csv";
        {
            std::ofstream f(map_path, std::ios::binary);
            if (!f) {
                log.line("cannot open " + map_path + " for writing");
                return kExitIoError;
            }
            f << "moon,M,N,p,q,V_inf_mps,alpha_deg,tof_days\n";
            for (const MapSample& s : samples)
                f << sys.moon(m).name << ',' << s.family.M << ',' << s.family.N << ','
                  << s.family.p << ',' << s.family.q << ',' << format_sig12(s.vinf_mps) << ','
                  << format_sig12(s.alpha_deg) << ',' << format_sig12(s.tof_days) << '\n';
            f.flush();
            if (!f) {
                log.line("write failed: " + map_path);
                return kExitIoError;
            }
        }
        log.line("map " + stem + ": " + std::to_string(families.size()) + " families, " +
                 std::to_string(samples.size()) + " samples -> " + map_path);

        const std::string ticks_path = paths.map + "/" + stem + "_ticks.csv";
        size_t tick_rows = 0;
        {
            std::ofstream f(ticks_path, std::ios::binary);
            if (!f) {
                log.line("cannot open " + ticks_path + " for writing");
                return kExitIoError;
            }
            f << "moon,M,N,p,q,vinf_mps,alpha_deg,dv_mps,vinf_dep_mps,alpha_dep_deg,"
                 "vinf_arr_mps,alpha_arr_deg\n";
            for (const auto& fr : table.families)
                for (size_t gi = 0; gi < table.grid_mps.size(); ++gi) {
                    if (!fr.present[gi]) continue;
                    const ViltRecord& r = fr.record[gi];
                    for (int k : {+1, -1}) {
                        const double dv = k * cfg.map_tick_dv_mps;
                        f << sys.moon(m).name << ',' << fr.family.M << ',' << fr.family.N
                          << ',' << fr.family.p << ',' << fr.family.q << ','
                          << format_sig12(r.vinf_mps) << ',' << format_sig12(r.alpha_deg)
                          << ',' << format_sig12(dv) << ','
                          << format_sig12(r.vinf_mps + dv * r.dvinfdep_dDV) << ','
                          << format_sig12(r.alpha_deg + dv * r.dalphadep_dDV) << ','
                          << format_sig12(r.vinf_mps + dv * r.dvinfarr_dDV) << ','
                          << format_sig12(r.alpha_deg + dv * r.dalphaarr_dDV) << '\n';
                        ++tick_rows;
                    }
                }
            f.flush();
            if (!f) {
                log.line("write failed: " + ticks_path);
                return kExitIoError;
            }
        }
        log.line("ticks " + stem + ": " + std::to_string(tick_rows) + " rows -> " + ticks_path);

        if (svg) {
            SvgPlot plot(window.vmin_mps, window.vmax_mps, 0.0, 180.0);
            for (const auto& fr : table.families)
                for (size_t gi = 0; gi < table.grid_mps.size(); ++gi) {
                    if (!fr.present[gi]) continue;
                    const ViltRecord& r = fr.record[gi];
                    for (int k : {+1, -1}) {
                        const double dv = k * cfg.map_tick_dv_mps;
                        plot.segment(r.vinf_mps, r.alpha_deg,
                                     r.vinf_mps + dv * r.dvinfdep_dDV,
                                     r.alpha_deg + dv * r.dalphadep_dDV, "#999999", 0.8);
                    }
                }
            size_t fam_ordinal = 0;
            size_t si = 0;
            while (si < samples.size()) {
                size_t sj = si;
                std::vector<std::pair<double, double>> pts;
                while (sj < samples.size() &&
                       !(samples[si].family.M != samples[sj].family.M ||
                         samples[si].family.N != samples[sj].family.N ||
                         samples[si].family.p != samples[sj].family.p ||
                         samples[si].family.q != samples[sj].family.q)) {
                    pts.emplace_back(samples[sj].vinf_mps, samples[sj].alpha_deg);
                    ++sj;
                }
                const char* color = kPalette[fam_ordinal % kPalette.size()];
                plot.polyline(pts, color);
                if (samples[si].family.M == 1 && samples[si].family.N == 1)
                    plot.label(pts.back().first, pts.back().second,
                               samples[si].family.label(), color);
                ++fam_ordinal;
                si = sj;
            }
            plot.axes("V-infinity, m/s", "pump angle, deg",
                      nice_tick(window.vmax_mps - window.vmin_mps), 30.0);
            const std::string svg_path = paths.map + "/" + stem + "_map.svg";
            std::ofstream f(svg_path, std::ios::binary);
            if (!f) {
                log.line("cannot open " + svg_path + " for writing");
                return kExitIoError;
            }
            f << plot.render();
            f.flush();
            if (!f) {
                log.line("write failed: " + svg_path);
                return kExitIoError;
            }
            log.line("svg " + stem + " -> " + svg_path);
        }
    }
    return kExitOk;
}

int cmd_report(const std::string& out_dir, const std::string& tour_id,
               std::ostream& console) {
    const RunPaths paths = run_paths(out_dir);
    auto name = canonical_tour_name(tour_id);
    if (!name.ok()) {
        console << name.message() << '\n';
        return exit_code_for(name.error());
    }
    const std::string table_path = paths.tours + "/" + *name + ".csv";
    const std::string summary_path = paths.tours + "/" + *name + "_summary.csv";
    if (!fs::exists(table_path) || !fs::exists(summary_path)) {
        console << "unknown tour id '" << tour_id << "' (no " << table_path << ")\n";
        return exit_code_for(ErrorCode::UnknownTourId);
    }

    auto table_text = read_file(table_path);
    auto summary_text = read_file(summary_path);
    if (!table_text.ok() || !summary_text.ok()) {
        console << (table_text.ok() ? summary_text.message() : table_text.message()) << '\n';
        return kExitIoError;
    }

    std::ostringstream md;
    md << "# Tour " << name->substr(5) << "\n";
    {
        std::istringstream is(*table_text);
        std::string line;
        std::getline(is, line);  // header
        std::string section;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto f = split_csv_line(line);
            if (f.size() != 7) {
                console << table_path << ": malformed row '" << line << "'\n";
                return exit_code_for(ErrorCode::ParseError);
            }
            if (f[0] != section) {
                section = f[0];
                md << "\n## " << section << "\n\n";
                md << "| # | Transfer | ToF, d | Alt, km | V∞, m/s | ΔV, m/s |\n";
                md << "| --- | --- | --- | --- | --- | --- |\n";
            }
            md << "| " << f[1] << " | " << f[2] << " | "
               << (f[3].empty() ? std::string() : fixed(parse_or(f[3], 0.0), 2)) << " | "
               << fixed(parse_or(f[4], 0.0), 1) << " | " << fixed(parse_or(f[5], 0.0), 1)
               << " | " << (f[6].empty() ? std::string() : fixed(parse_or(f[6], 0.0), 2))
               << " |\n";
        }
    }
    {
        std::istringstream is(*summary_text);
        std::string line;
        std::getline(is, line);  // header
        md << "\n## Summary\n\n";
        md << "| Section | ToF, d | ΔV, m/s |\n";
        md << "| --- | --- | --- |\n";
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto f = split_csv_line(line);
            if (f.size() != 3) {
                console << summary_path << ": malformed row '" << line << "'\n";
                return exit_code_for(ErrorCode::ParseError);
            }
            md << "| " << f[0] << " | "
               << (f[1].empty() ? std::string() : fixed(parse_or(f[1], 0.0), 2)) << " | "
               << fixed(parse_or(f[2], 0.0), 2) << " |\n";
        }
    }
    console << md.str();
    return kExitOk;
}

int run_twice_and_diff(const std::function<int(const std::string&)>& action,
                       const std::string& out_dir, std::ostream& console) {
    const int rc1 = action(out_dir);
    const std::string check_dir = out_dir + "_check";
    {
        std::error_code ec;
        fs::remove_all(check_dir, ec);
    }
    const int rc2 = action(check_dir);
    if (rc1 != rc2) {
        console << "determinism check: exit statuses differ (" << rc1 << " vs " << rc2
                << ")\n";
        return rc1 != 0 ? rc1 : rc2;
    }

    const auto listing = [](const std::string& root) {
        std::vector<std::string> rel;
        if (fs::exists(root))
            for (const auto& entry : fs::recursive_directory_iterator(root)) {
                if (!entry.is_regular_file()) continue;
                if (entry.path().filename() == "run.log") continue;
                rel.push_back(fs::relative(entry.path(), root).generic_string());
            }
        std::sort(rel.begin(), rel.end());
        return rel;
    };
    const auto a = listing(out_dir);
    const auto b = listing(check_dir);
    if (a != b) {
        console << "determinism check: artifact sets differ between " << out_dir << " and "
                << check_dir << '\n';
        return 1;
    }
    for (const std::string& rel : a) {
        auto left = read_file(out_dir + "/" + rel);
        auto right = read_file(check_dir + "/" + rel);
        if (!left.ok() || !right.ok()) {
            console << "determinism check: cannot reread " << rel << '\n';
            return 1;
        }
        if (*left != *right) {
            console << "determinism check: " << rel << " differs\n";
            return 1;
        }
    }
    console << "determinism check: " << a.size() << " artifacts identical\n";
    return rc1;
}

}  // namespace pumpdown
