#include "pumpdown/astro.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace pumpdown {

const char* error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::None: return "None";
        case ErrorCode::HyperbolicOrbit: return "HyperbolicOrbit";
        case ErrorCode::RadiusOutOfRange: return "RadiusOutOfRange";
        case ErrorCode::InfeasibleResonance: return "InfeasibleResonance";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::SeedInfeasible: return "SeedInfeasible";
        case ErrorCode::SolverDiverged: return "SolverDiverged";
        case ErrorCode::OutOfSpan: return "OutOfSpan";
        case ErrorCode::DeltaVCapExceeded: return "DeltaVCapExceeded";
        case ErrorCode::BelowFamilyFloor: return "BelowFamilyFloor";
        case ErrorCode::EmptyFront: return "EmptyFront";
        case ErrorCode::InconsistentChain: return "InconsistentChain";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::UnknownTourId: return "UnknownTourId";
    }
    return "Unknown";
}

SystemModel default_system() {
    SystemModel sys;
    sys.gm_saturn = kGmSaturn;
    sys.moons[0] = {"Titan", 1221870.0, 0.0288, 0.33, 2574.7, 15.945, 8977.9, 1600.0};
    sys.moons[1] = {"Rhea", 527108.0, 0.0010, 0.35, 763.8, 4.518212, 153.94, 50.0};
    sys.moons[2] = {"Dione", 377396.0, 0.0022, 0.02, 561.4, 2.737, 73.110, 50.0};
    sys.moons[3] = {"Tethys", 294619.0, 0.0001, 1.09, 531.1, 1.890, 41.209, 50.0};
    sys.moons[4] = {"Enceladus", 237948.0, 0.0047, 0.02, 252.1, 1.370, 7.2094, 25.0};
    return sys;
}

int moon_index(std::string_view name) {
    static const SystemModel sys = default_system();
    for (int i = 0; i < kMoonCount; ++i) {
        const std::string& m = sys.moons[static_cast<size_t>(i)].name;
        if (m.size() != name.size()) continue;
        bool eq = true;
        for (size_t j = 0; j < m.size(); ++j) {
            if (std::tolower(static_cast<unsigned char>(m[j])) !=
                std::tolower(static_cast<unsigned char>(name[j]))) {
                eq = false;
                break;
            }
        }
        if (eq) return i;
    }
    return -1;
}

double ConicOrbit::period_s(double gm_s) const {
    return 2.0 * kPi * std::sqrt(a_km * a_km * a_km / gm_s);
}

double circular_velocity(const MoonParams& moon, const SystemModel& sys) {
    return std::sqrt(sys.gm_saturn / moon.a_km);
}

double sc_speed_after_flyby(double v_moon_kms, double vinf_kms, double alpha_deg) {
    const double ca = std::cos(alpha_deg * kRadPerDeg);
    const double v2 = v_moon_kms * v_moon_kms + vinf_kms * vinf_kms +
                      2.0 * v_moon_kms * vinf_kms * ca;
    return std::sqrt(std::max(v2, 0.0));
}

double sc_angular_momentum(double r_moon_km, double v_moon_kms, double vinf_kms,
                           double alpha_deg) {
    return r_moon_km * (v_moon_kms + vinf_kms * std::cos(alpha_deg * kRadPerDeg));
}

Result<ConicOrbit> conic_from_flyby(const MoonParams& moon, const SystemModel& sys,
                                    const FlybyState& state) {
    const double v_moon = circular_velocity(moon, sys);
    const double vinf = state.vinf_mps / 1000.0;
    const double v = sc_speed_after_flyby(v_moon, vinf, state.alpha_deg);
    const double energy = 0.5 * v * v - sys.gm_saturn / moon.a_km;
    if (energy >= 0.0)
        return Result<ConicOrbit>(ErrorCode::HyperbolicOrbit,
                                  "post-flyby state is not bound to Saturn");
    ConicOrbit orbit;
    orbit.a_km = -sys.gm_saturn / (2.0 * energy);
    orbit.h = sc_angular_momentum(moon.a_km, v_moon, vinf, state.alpha_deg);
    const double e2 = 1.0 - orbit.h * orbit.h / (sys.gm_saturn * orbit.a_km);
    orbit.e = std::sqrt(std::max(e2, 0.0));
    return Result<ConicOrbit>(orbit);
}

double max_bend_angle(const MoonParams& moon, double vinf_mps) {
    const double vinf = vinf_mps / 1000.0;
    const double mu = (moon.radius_km + moon.min_flyby_alt_km) / moon.gm;
    return 2.0 * std::asin(1.0 / (1.0 + mu * vinf * vinf)) * kDegPerRad;
}

Result<double> altitude_for_bend(const MoonParams& moon, double vinf_mps, double bend_deg) {
    if (bend_deg <= 0.0)
        return Result<double>(1e12);  // no turning needed; effectively unbounded
    const double vinf = vinf_mps / 1000.0;
    const double s = std::sin(0.5 * bend_deg * kRadPerDeg);
    if (s <= 0.0) return Result<double>(1e12);
    // sin(delta/2) = 1/(1 + (r+alt) vinf^2 / GM)  =>  r+alt = GM (1/s - 1)/vinf^2
    const double rp = moon.gm * (1.0 / s - 1.0) / (vinf * vinf);
    const double alt = rp - moon.radius_km;
    if (alt < moon.min_flyby_alt_km - 1e-9)
        return Result<double>(ErrorCode::ValidationError,
                              "requested bend exceeds the altitude-floor capability");
    return Result<double>(alt);
}

Result<AnomalyAtRadius> true_anomaly_at_radius(const ConicOrbit& orbit, double r_km,
                                               double gm_s) {
    AnomalyAtRadius out;
    if (orbit.e < 1e-12) {
        out.f_deg = 0.0;
        out.well_defined = false;
        return Result<AnomalyAtRadius>(out);
    }
    const double p = orbit.h * orbit.h / gm_s;  // semilatus rectum
    const double c = (p / r_km - 1.0) / orbit.e;
    if (c < -1.0 - 1e-9 || c > 1.0 + 1e-9)
        return Result<AnomalyAtRadius>(ErrorCode::RadiusOutOfRange,
                                       "radius not reachable on this orbit");
    out.f_deg = std::acos(std::clamp(c, -1.0, 1.0)) * kDegPerRad;
    out.well_defined = true;
    return Result<AnomalyAtRadius>(out);
}

double time_from_periapsis(const ConicOrbit& orbit, double f_deg, double gm_s) {
    return kepler::time_from_periapsis_rad(gm_s, orbit.a_km, orbit.e, f_deg * kRadPerDeg);
}

double orbit_insertion_dv(double vinf_mps, const MoonParams& moon, double alt_km) {
    const double r = moon.radius_km + alt_km;
    const double vinf = vinf_mps / 1000.0;
    const double v_arr = std::sqrt(vinf * vinf + 2.0 * moon.gm / r);
    const double v_circ = std::sqrt(moon.gm / r);
    return (v_arr - v_circ) * 1000.0;
}

namespace kepler {

bool elements_from_state(double gm, double r, double vr, double vt, Elements& out) {
    const double v2 = vr * vr + vt * vt;
    const double energy = 0.5 * v2 - gm / r;
    if (energy >= 0.0) return false;
    const double h = r * vt;
    if (std::abs(h) < 1e-300) return false;
    out.a = -gm / (2.0 * energy);
    const double e2 = 1.0 - h * h / (gm * out.a);
    out.e = std::sqrt(std::max(e2, 0.0));
    out.h = h;
    // e sin f = h vr / gm, e cos f = h^2/(gm r) - 1
    out.f = std::atan2(h * vr / gm, h * h / (gm * r) - 1.0);
    return true;
}

double radius(double a, double e, double f) {
    return a * (1.0 - e * e) / (1.0 + e * std::cos(f));
}

double eccentric_from_true(double e, double f) {
    return 2.0 * std::atan2(std::sqrt(1.0 - e) * std::sin(0.5 * f),
                            std::sqrt(1.0 + e) * std::cos(0.5 * f));
}

double time_from_periapsis_rad(double gm, double a, double e, double f) {
    const double ecc = eccentric_from_true(e, f);
    const double mean = ecc - e * std::sin(ecc);
    return mean * std::sqrt(a * a * a / gm);
}

double unwrapped_time(double gm, double a, double e, double f) {
    // Principal value plus whole revolutions so time is monotone in f.
    const double k = std::floor((f + kPi) / (2.0 * kPi));
    const double fp = f - 2.0 * kPi * k;
    const double period = 2.0 * kPi * std::sqrt(a * a * a / gm);
    return time_from_periapsis_rad(gm, a, e, fp) + k * period;
}

void velocity(double gm, double e, double h, double f, double& vr, double& vt) {
    vr = gm * e * std::sin(f) / h;
    vt = gm * (1.0 + e * std::cos(f)) / h;
}

}  // namespace kepler

}  // namespace pumpdown
