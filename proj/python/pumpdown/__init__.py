"""Gravity-assisted pump-down tour design for Saturn's large moons.

The heavy lifting lives in the compiled `_pumpdown` extension; this package
just re-exports its public surface.
"""

from ._pumpdown import (
    GM_SATURN_KM3_S2,
    MOON_COUNT,
    Ballistic,
    Family,
    Leg,
    Moon,
    RunConfig,
    Window,
    default_windows,
    enumerate_families,
    eoi_delta_v,
    family_vinf_floor_mps,
    gen_db,
    load_config,
    make_map,
    max_bend_angle_deg,
    moon,
    moon_names,
    report,
    run_tour,
    solve_ballistic,
    solve_leg,
)

__all__ = [
    "GM_SATURN_KM3_S2",
    "MOON_COUNT",
    "Ballistic",
    "Family",
    "Leg",
    "Moon",
    "RunConfig",
    "Window",
    "default_windows",
    "enumerate_families",
    "eoi_delta_v",
    "family_vinf_floor_mps",
    "gen_db",
    "load_config",
    "make_map",
    "max_bend_angle_deg",
    "moon",
    "moon_names",
    "report",
    "run_tour",
    "solve_ballistic",
    "solve_leg",
]
