#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pumpdown/astro.hpp"
#include "pumpdown/commands.hpp"
#include "pumpdown/config.hpp"
#include "pumpdown/pathfinder.hpp"
#include "pumpdown/resonance.hpp"
#include "pumpdown/vilt.hpp"

namespace py = pybind11;
using namespace pumpdown;

namespace {

int moon_idx_checked(const std::string& name) {
    const int idx = moon_index(name);
    if (idx < 0) throw py::value_error("unknown moon '" + name + "'");
    return idx;
}

template <typename T>
T unwrap(Result<T> r) {
    if (!r.ok()) {
        if (r.error() == ErrorCode::ValidationError || r.error() == ErrorCode::ParseError)
            throw py::value_error(r.message());
        throw std::runtime_error(r.message());
    }
    return *r;
}

}  // namespace

PYBIND11_MODULE(_pumpdown, m) {
    m.doc() =
        "Gravity-assisted pump-down tour design for Saturn's large moons: "
        "resonant-transfer solvers, database generation, the staged "
        "multi-objective search and its exported artifacts.";

    m.attr("GM_SATURN_KM3_S2") = kGmSaturn;
    m.attr("MOON_COUNT") = static_cast<int>(kMoonCount);

    py::class_<MoonParams>(m, "Moon", "Physical and orbital constants of one moon.")
        .def_readonly("name", &MoonParams::name)
        .def_readonly("a_km", &MoonParams::a_km)
        .def_readonly("e", &MoonParams::e)
        .def_readonly("i_deg", &MoonParams::i_deg)
        .def_readonly("radius_km", &MoonParams::radius_km)
        .def_readonly("period_days", &MoonParams::period_days)
        .def_readonly("gm_km3_s2", &MoonParams::gm)
        .def_readonly("min_flyby_alt_km", &MoonParams::min_flyby_alt_km)
        .def("__repr__", [](const MoonParams& p) { return "<Moon " + p.name + ">"; });

    py::class_<ResonanceFamily>(m, "Family",
                                "M:N resonance family with leg directions p and q.")
        .def(py::init([](int M, int N, int p, int q) {
                 ResonanceFamily f;
                 f.M = M;
                 f.N = N;
                 f.p = p;
                 f.q = q;
                 return f;
             }),
             py::arg("M"), py::arg("N"), py::arg("p") = +1, py::arg("q") = +1)
        .def_readwrite("M", &ResonanceFamily::M)
        .def_readwrite("N", &ResonanceFamily::N)
        .def_readwrite("p", &ResonanceFamily::p)
        .def_readwrite("q", &ResonanceFamily::q)
        .def("label", &ResonanceFamily::label)
        .def("__repr__", [](const ResonanceFamily& f) { return "<Family " + f.label() + ">"; });

    py::class_<VinfWindow>(m, "Window", "Excess-speed window and revolution cap.")
        .def(py::init([](double vmin, double vmax, int max_m) {
                 VinfWindow w;
                 w.vmin_mps = vmin;
                 w.vmax_mps = vmax;
                 w.max_m = max_m;
                 return w;
             }),
             py::arg("vmin_mps"), py::arg("vmax_mps"), py::arg("max_m"))
        .def_readwrite("vmin_mps", &VinfWindow::vmin_mps)
        .def_readwrite("vmax_mps", &VinfWindow::vmax_mps)
        .def_readwrite("max_m", &VinfWindow::max_m);

    py::class_<BallisticSolution>(m, "Ballistic", "Maneuver-free resonant transfer.")
        .def_readonly("alpha_deg", &BallisticSolution::alpha_deg)
        .def_readonly("f_deg", &BallisticSolution::f_deg)
        .def_readonly("tof_days", &BallisticSolution::tof_days)
        .def_readonly("theta1_deg", &BallisticSolution::theta1_deg)
        .def_readonly("theta2_deg", &BallisticSolution::theta2_deg);

    py::class_<OptimalLeg>(m, "Leg", "Locally optimal single-impulse leveraging leg.")
        .def_readonly("dv_mps", &OptimalLeg::dv_mps)
        .def_readonly("tof_days", &OptimalLeg::tof_days)
        .def_readonly("alpha_dep_deg", &OptimalLeg::alpha_dep_deg)
        .def_readonly("alpha_arr_deg", &OptimalLeg::alpha_arr_deg)
        .def_readonly("vinf_dep_mps", &OptimalLeg::vinf_dep_mps)
        .def_readonly("vinf_arr_mps", &OptimalLeg::vinf_arr_mps)
        .def_readonly("junction_radius_km", &OptimalLeg::junction_radius_km)
        .def_readonly("position_miss_km", &OptimalLeg::position_miss_km)
        .def_readonly("time_miss_days", &OptimalLeg::time_miss_days);

    m.def("moon_names", [] {
        const SystemModel sys = default_system();
        std::vector<std::string> names;
        for (const auto& moon : sys.moons) names.push_back(moon.name);
        return names;
    });
    m.def(
        "moon", [](const std::string& name) { return default_system().moon(moon_idx_checked(name)); },
        py::arg("name"), "Constants of one moon (by case-insensitive name).");
    m.def(
        "default_windows", [] { return default_vinf_windows(); },
        "Stock excess-speed windows, index-aligned with moon_names().");

    m.def(
        "enumerate_families",
        [](const std::string& moon, const VinfWindow& window) {
            const SystemModel sys = default_system();
            return enumerate_families(sys.moon(moon_idx_checked(moon)), sys, window);
        },
        py::arg("moon"), py::arg("window"),
        "Family set searched at a moon for a given window.");

    m.def(
        "solve_ballistic",
        [](const std::string& moon, const ResonanceFamily& fam, double vinf_mps) {
            const SystemModel sys = default_system();
            return unwrap(solve_ballistic(sys.moon(moon_idx_checked(moon)), sys, fam, vinf_mps));
        },
        py::arg("moon"), py::arg("family"), py::arg("vinf_mps"),
        "Ballistic resonant transfer at one excess speed.");

    m.def(
        "solve_leg",
        [](const std::string& moon, const ResonanceFamily& fam, double vinf_mps,
           double dvinf_mps) {
            const SystemModel sys = default_system();
            LegProblem prob;
            prob.family = fam;
            prob.vinf_mps = vinf_mps;
            prob.dvinf_mps = dvinf_mps;
            return unwrap(solve_leg(sys.moon(moon_idx_checked(moon)), sys, prob));
        },
        py::arg("moon"), py::arg("family"), py::arg("vinf_mps"), py::arg("dvinf_mps"),
        "Optimal single-impulse leg splitting the excess speed by +/- dvinf.");

    m.def(
        "max_bend_angle_deg",
        [](const std::string& moon, double vinf_mps) {
            const SystemModel sys = default_system();
            return max_bend_angle(sys.moon(moon_idx_checked(moon)), vinf_mps);
        },
        py::arg("moon"), py::arg("vinf_mps"),
        "Largest turn a minimum-altitude flyby can produce, degrees.");

    m.def(
        "eoi_delta_v",
        [](double vinf_mps, const std::string& moon, double altitude_km) {
            const SystemModel sys = default_system();
            return eoi_delta_v(vinf_mps, sys.moon(moon_idx_checked(moon)), altitude_km);
        },
        py::arg("vinf_mps"), py::arg("moon") = "enceladus", py::arg("altitude_km") = 100.0,
        "Insertion burn from a hyperbolic arrival into a circular orbit, m/s.");

    m.def(
        "family_vinf_floor_mps",
        [](const std::string& moon, const ResonanceFamily& fam) {
            const SystemModel sys = default_system();
            return family_vinf_floor_mps(sys.moon(moon_idx_checked(moon)), sys, fam);
        },
        py::arg("moon"), py::arg("family"),
        "Smallest excess speed at which the family's velocity triangle closes.");

    // ---- run configuration and the four pipeline operations ----
    py::class_<RunConfig>(m, "RunConfig",
                          "Full pipeline configuration; constructed with the stock defaults.")
        .def(py::init<>())
        .def_readwrite("gm_saturn_km3s2", &RunConfig::gm_saturn_km3s2)
        .def_readwrite("start_moon", &RunConfig::start_moon)
        .def_readwrite("start_vinf_mps", &RunConfig::start_vinf_mps)
        .def_readwrite("start_alpha_deg", &RunConfig::start_alpha_deg)
        .def_readwrite("tof_cap_years", &RunConfig::tof_cap_years)
        .def_readwrite("dp_grid_step_mps", &RunConfig::dp_grid_step_mps)
        .def_readwrite("db_grid_step_mps", &RunConfig::db_grid_step_mps)
        .def_readwrite("bins_enabled", &RunConfig::bins_enabled)
        .def_readwrite("bin_tof_days", &RunConfig::bin_tof_days)
        .def_readwrite("bin_dv_mps", &RunConfig::bin_dv_mps)
        .def_readwrite("bin_vinf_mps", &RunConfig::bin_vinf_mps)
        .def_readwrite("bin_alpha_divisor", &RunConfig::bin_alpha_divisor)
        .def_readwrite("dv_cap_mps", &RunConfig::dv_cap_mps)
        .def_readwrite("eoi_trigger_vinf_mps", &RunConfig::eoi_trigger_vinf_mps)
        .def_readwrite("eoi_altitude_km", &RunConfig::eoi_altitude_km)
        .def_readwrite("max_flybys_per_moon", &RunConfig::max_flybys_per_moon)
        .def_readwrite("workers", &RunConfig::workers)
        .def_readwrite("out_dir", &RunConfig::out_dir)
        .def_readwrite("map_tick_dv_mps", &RunConfig::map_tick_dv_mps)
        .def(
            "window",
            [](const RunConfig& cfg, const std::string& moon) {
                return cfg.windows[static_cast<size_t>(moon_idx_checked(moon))];
            },
            py::arg("moon"))
        .def(
            "set_window",
            [](RunConfig& cfg, const std::string& moon, double vmin, double vmax, int max_m) {
                VinfWindow& w = cfg.windows[static_cast<size_t>(moon_idx_checked(moon))];
                w.vmin_mps = vmin;
                w.vmax_mps = vmax;
                w.max_m = max_m;
            },
            py::arg("moon"), py::arg("vmin_mps"), py::arg("vmax_mps"), py::arg("max_m"));

    m.def("load_config", [](const std::string& path) { return unwrap(load_config(path)); },
          py::arg("path"), "Parse and validate a flat-JSON configuration file.");

    const auto run_logged = [](int status, const std::string& output) {
        return py::make_tuple(status, output);
    };

    m.def(
        "gen_db",
        [run_logged](const RunConfig& cfg, const std::string& out_dir,
                     const std::string& moons) {
            std::ostringstream console;
            const int status =
                cmd_gen_db(cfg, unwrap(parse_moon_list(moons)), out_dir, console);
            return run_logged(status, console.str());
        },
        py::arg("config"), py::arg("out_dir"), py::arg("moons") = "",
        "Build and persist transfer databases. Returns (status, log_text).");

    m.def(
        "run_tour",
        [run_logged](const RunConfig& cfg, const std::string& out_dir) {
            std::ostringstream console;
            const int status = cmd_tour(cfg, out_dir, console);
            return run_logged(status, console.str());
        },
        py::arg("config"), py::arg("out_dir"),
        "Run the staged search end to end. Returns (status, log_text).");

    m.def(
        "make_map",
        [run_logged](const RunConfig& cfg, const std::string& out_dir,
                     const std::string& moons, bool svg) {
            std::ostringstream console;
            const int status =
                cmd_map(cfg, unwrap(parse_moon_list(moons)), out_dir, svg, console);
            return run_logged(status, console.str());
        },
        py::arg("config"), py::arg("out_dir"), py::arg("moons") = "", py::arg("svg") = false,
        "Export pump-angle map curves and tick annotations. Returns (status, log_text).");

    m.def(
        "report",
        [run_logged](const std::string& out_dir, const std::string& tour_id) {
            std::ostringstream console;
            const int status = cmd_report(out_dir, tour_id, console);
            return run_logged(status, console.str());
        },
        py::arg("out_dir"), py::arg("tour_id"),
        "Render one stored tour as markdown tables. Returns (status, markdown).");
}
