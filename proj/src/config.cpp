#include "pumpdown/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

namespace pumpdown {

namespace {

using nlohmann::json;

std::size_t line_of_offset(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

constexpr const char* kMoonKeys[kMoonCount] = {"titan", "rhea", "dione", "tethys",
                                               "enceladus"};

struct Setter {
    enum Kind { Number, Integer, Boolean, Text } kind;
    std::function<void(const json&)> apply;
};

std::map<std::string, Setter> setter_table(RunConfig& cfg) {
    std::map<std::string, Setter> t;
    auto num = [&t](const char* key, double& slot) {
        t.emplace(key, Setter{Setter::Number, [&slot](const json& v) { slot = v.get<double>(); }});
    };
    auto integer = [&t](const char* key, int& slot) {
        t.emplace(key, Setter{Setter::Integer, [&slot](const json& v) { slot = v.get<int>(); }});
    };
    auto boolean = [&t](const char* key, bool& slot) {
        t.emplace(key, Setter{Setter::Boolean, [&slot](const json& v) { slot = v.get<bool>(); }});
    };
    auto text = [&t](const char* key, std::string& slot) {
        t.emplace(key,
                  Setter{Setter::Text, [&slot](const json& v) { slot = v.get<std::string>(); }});
    };

    num("gm_saturn_km3s2", cfg.gm_saturn_km3s2);
    text("start_moon", cfg.start_moon);
    num("start_vinf_mps", cfg.start_vinf_mps);
    num("start_alpha_deg", cfg.start_alpha_deg);
    num("tof_cap_years", cfg.tof_cap_years);
    num("dp_grid_step_mps", cfg.dp_grid_step_mps);
    num("db_grid_step_mps", cfg.db_grid_step_mps);
    boolean("bins_enabled", cfg.bins_enabled);
    num("bin_tof_days", cfg.bin_tof_days);
    num("bin_dv_mps", cfg.bin_dv_mps);
    num("bin_vinf_mps", cfg.bin_vinf_mps);
    num("bin_alpha_divisor", cfg.bin_alpha_divisor);
    num("dv_cap_mps", cfg.dv_cap_mps);
    num("eoi_trigger_vinf_mps", cfg.eoi_trigger_vinf_mps);
    num("eoi_altitude_km", cfg.eoi_altitude_km);
    integer("max_flybys_per_moon", cfg.max_flybys_per_moon);
    integer("workers", cfg.workers);
    text("out_dir", cfg.out_dir);
    num("map_tick_dv_mps", cfg.map_tick_dv_mps);
    for (int m = 0; m < kMoonCount; ++m) {
        const std::string moon = kMoonKeys[m];
        VinfWindow& w = cfg.windows[static_cast<size_t>(m)];
        num((moon + "_vinf_min_mps").c_str(), w.vmin_mps);
        num((moon + "_vinf_max_mps").c_str(), w.vmax_mps);
        integer((moon + "_max_m").c_str(), w.max_m);
    }
    return t;
}

bool type_matches(Setter::Kind kind, const json& v) {
    switch (kind) {
        case Setter::Number: return v.is_number();
        case Setter::Integer: return v.is_number_integer();
        case Setter::Boolean: return v.is_boolean();
        case Setter::Text: return v.is_string();
    }
    return false;
}

const char* type_name(Setter::Kind kind) {
    switch (kind) {
        case Setter::Number: return "number";
        case Setter::Integer: return "integer";
        case Setter::Boolean: return "boolean";
        case Setter::Text: return "string";
    }
    return "?";
}

Result<bool> invalid(const std::string& key, const std::string& why) {
    return Result<bool>(ErrorCode::ValidationError, "config key '" + key + "' " + why);
}

}  // namespace

Result<bool> validate_config(const RunConfig& cfg) {
    if (!(cfg.gm_saturn_km3s2 > 0.0)) return invalid("gm_saturn_km3s2", "must be positive");
    if (moon_index(cfg.start_moon) < 0)
        return invalid("start_moon",
                       "must be one of titan, rhea, dione, tethys, enceladus");
    if (!(cfg.start_vinf_mps > 0.0)) return invalid("start_vinf_mps", "must be positive");
    if (!(std::abs(cfg.start_alpha_deg) <= 180.0))
        return invalid("start_alpha_deg", "must lie in [-180, 180]");
    if (!(cfg.tof_cap_years > 0.0)) return invalid("tof_cap_years", "must be positive");
    if (!(cfg.dp_grid_step_mps > 0.0)) return invalid("dp_grid_step_mps", "must be positive");
    if (!(cfg.db_grid_step_mps > 0.0)) return invalid("db_grid_step_mps", "must be positive");
    if (!(cfg.bin_tof_days > 0.0)) return invalid("bin_tof_days", "must be positive");
    if (!(cfg.bin_dv_mps > 0.0)) return invalid("bin_dv_mps", "must be positive");
    if (!(cfg.bin_vinf_mps > 0.0)) return invalid("bin_vinf_mps", "must be positive");
    if (!(cfg.bin_alpha_divisor > 0.0)) return invalid("bin_alpha_divisor", "must be positive");
    if (!(cfg.dv_cap_mps > 0.0)) return invalid("dv_cap_mps", "must be positive");
    if (!(cfg.eoi_trigger_vinf_mps > 0.0))
        return invalid("eoi_trigger_vinf_mps", "must be positive");
    if (!(cfg.eoi_altitude_km > 0.0)) return invalid("eoi_altitude_km", "must be positive");
    if (cfg.max_flybys_per_moon < 1) return invalid("max_flybys_per_moon", "must be >= 1");
    if (cfg.workers < 1) return invalid("workers", "must be >= 1");
    if (cfg.out_dir.empty()) return invalid("out_dir", "must not be empty");
    if (!(cfg.map_tick_dv_mps > 0.0)) return invalid("map_tick_dv_mps", "must be positive");
    for (int m = 0; m < kMoonCount; ++m) {
        const VinfWindow& w = cfg.windows[static_cast<size_t>(m)];
        const std::string moon = kMoonKeys[m];
        if (!(w.vmin_mps > 0.0)) return invalid(moon + "_vinf_min_mps", "must be positive");
        if (!(w.vmax_mps >= w.vmin_mps))
            return invalid(moon + "_vinf_max_mps", "must be >= the window minimum");
        if (w.max_m < 1) return invalid(moon + "_max_m", "must be >= 1");
    }
    return Result<bool>(true);
}

Result<RunConfig> load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return Result<RunConfig>(ErrorCode::IoError, "cannot read config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    RunConfig cfg;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        return Result<RunConfig>(std::move(cfg));  // empty file: all defaults

    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        return Result<RunConfig>(
            ErrorCode::ParseError, "config syntax error near line " +
                                       std::to_string(line_of_offset(text, e.byte)) + ": " +
                                       e.what());
    }
    if (!doc.is_object())
        return Result<RunConfig>(ErrorCode::ParseError,
                                 "config must be a flat JSON object of key/value pairs");

    const auto setters = setter_table(cfg);
    for (const auto& [key, value] : doc.items()) {
        auto it = setters.find(key);
        if (it == setters.end())
            return Result<RunConfig>(ErrorCode::ValidationError,
                                     "unknown config key '" + key + "'");
        if (!type_matches(it->second.kind, value))
            return Result<RunConfig>(ErrorCode::ParseError,
                                     "config field '" + key + "': expected " +
                                         type_name(it->second.kind));
        it->second.apply(value);
    }

    auto valid = validate_config(cfg);
    if (!valid.ok()) return Result<RunConfig>(valid.error(), valid.message());
    return Result<RunConfig>(std::move(cfg));
}

SystemModel system_model(const RunConfig& cfg) {
    SystemModel sys = default_system();
    sys.gm_saturn = cfg.gm_saturn_km3s2;
    return sys;
}

Result<SearchParams> search_params(const RunConfig& cfg) {
    auto valid = validate_config(cfg);
    if (!valid.ok()) return Result<SearchParams>(valid.error(), valid.message());
    SearchParams par;
    par.start_moon_idx = moon_index(cfg.start_moon);
    par.start_vinf_mps = cfg.start_vinf_mps;
    par.start_alpha_deg = cfg.start_alpha_deg;
    par.tof_cap_days = cfg.tof_cap_years * 365.25;
    par.dp_grid_step_mps = cfg.dp_grid_step_mps;
    par.dv_cap_mps = cfg.dv_cap_mps;
    par.eoi_trigger_vinf_mps = cfg.eoi_trigger_vinf_mps;
    par.eoi_altitude_km = cfg.eoi_altitude_km;
    par.max_flybys_per_moon = cfg.max_flybys_per_moon;
    par.bins_enabled = cfg.bins_enabled;
    par.bin_tof_days = cfg.bin_tof_days;
    par.bin_dv_mps = cfg.bin_dv_mps;
    par.bin_vinf_mps = cfg.bin_vinf_mps;
    par.bin_alpha_divisor = cfg.bin_alpha_divisor;
    par.workers = cfg.workers;
    par.windows = cfg.windows;
    return Result<SearchParams>(par);
}

Result<SystemModel> read_moon_constants(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        return Result<SystemModel>(ErrorCode::IoError,
                                   "cannot read constants file: " + path);
    SystemModel sys;
    bool saw_gm = false;
    std::array<bool, kMoonCount> seen{};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        std::string head;
        if (!(row >> head)) continue;  // blank or comment-only line
        const std::string where = " (line " + std::to_string(lineno) + ")";
        if (head == "gm_saturn") {
            if (!(row >> sys.gm_saturn))
                return Result<SystemModel>(ErrorCode::ParseError,
                                           "bad gm_saturn value" + where);
            saw_gm = true;
            continue;
        }
        const int idx = moon_index(head);
        if (idx < 0)
            return Result<SystemModel>(ErrorCode::ParseError,
                                       "unknown row '" + head + "'" + where);
        MoonParams& m = sys.moons[static_cast<size_t>(idx)];
        m.name = head;
        m.name[0] = static_cast<char>(std::toupper(m.name[0]));
        if (!(row >> m.a_km >> m.e >> m.i_deg >> m.radius_km >> m.period_days >> m.gm >>
              m.min_flyby_alt_km))
            return Result<SystemModel>(ErrorCode::ParseError,
                                       "row '" + head + "' needs 7 numeric columns" + where);
        double extra;
        if (row >> extra)
            return Result<SystemModel>(ErrorCode::ParseError,
                                       "row '" + head + "' has trailing columns" + where);
        seen[static_cast<size_t>(idx)] = true;
    }
    if (!saw_gm)
        return Result<SystemModel>(ErrorCode::ValidationError, "missing gm_saturn row");
    for (int m = 0; m < kMoonCount; ++m)
        if (!seen[static_cast<size_t>(m)])
            return Result<SystemModel>(ErrorCode::ValidationError,
                                       std::string("missing row for ") + kMoonKeys[m]);
    return Result<SystemModel>(std::move(sys));
}

}  // namespace pumpdown
