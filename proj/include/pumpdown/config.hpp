#pragma once

#include <array>
#include <string>

#include "pumpdown/astro.hpp"
#include "pumpdown/errors.hpp"
#include "pumpdown/pathfinder.hpp"
#include "pumpdown/resonance.hpp"

namespace pumpdown {

/// One run's complete configuration. Defaults reproduce the reference
/// setup: 1460 m/s / 50 deg arrival at Titan, 3-year cap, 30 m/s grids,
/// bins {5 d, 1 m/s, max|dAlpha|/4, 10 m/s}, 100 m/s leg cap, 450 m/s
/// insertion trigger, 100 km final orbit.
///
/// File format: flat JSON object, every key optional. Keys mirror the
/// field names below; per-moon speed windows use
///   <moon>_vinf_min_mps, <moon>_vinf_max_mps, <moon>_max_m
/// with moon in {titan, rhea, dione, tethys, enceladus}. An empty file
/// (or {}) yields this default-constructed value.
struct RunConfig {
    double gm_saturn_km3s2 = kGmSaturn;

    std::string start_moon = "titan";
    double start_vinf_mps = 1460.0;
    double start_alpha_deg = 50.0;

    double tof_cap_years = 3.0;
    double dp_grid_step_mps = 30.0;
    double db_grid_step_mps = 30.0;

    bool bins_enabled = true;
    double bin_tof_days = 5.0;
    double bin_dv_mps = 1.0;
    double bin_vinf_mps = 10.0;
    double bin_alpha_divisor = 4.0;

    double dv_cap_mps = 100.0;
    double eoi_trigger_vinf_mps = 450.0;
    double eoi_altitude_km = 100.0;
    int max_flybys_per_moon = 40;

    int workers = 4;
    std::string out_dir = "out";
    double map_tick_dv_mps = 15.0;

    std::array<VinfWindow, kMoonCount> windows = default_vinf_windows();
};

/// Parse + validate a config file. Unset keys keep their defaults; an
/// empty or all-whitespace file is the default config. Errors:
/// IoError (unreadable), ParseError (syntax, with line; or field type,
/// with key), ValidationError (invariant violated, names the key).
Result<RunConfig> load_config(const std::string& path);

/// Validate an in-memory config against the same invariants load_config
/// enforces; failures name the violated key.
Result<bool> validate_config(const RunConfig& cfg);

/// System constants with the configured Saturn GM applied.
SystemModel system_model(const RunConfig& cfg);

/// Search-parameter view of the config (years converted to days, start
/// moon resolved to an index).
Result<SearchParams> search_params(const RunConfig& cfg);

/// Moon-constants table parser (same columns as data/moon_constants.txt:
/// name a_km e i_deg radius_km period_days gm_km3s2 min_flyby_alt_km,
/// plus one "gm_saturn <value>" line; '#' starts a comment).
Result<SystemModel> read_moon_constants(const std::string& path);

}  // namespace pumpdown
