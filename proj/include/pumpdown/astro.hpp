#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "pumpdown/errors.hpp"

namespace pumpdown {

// Unit conventions: library interfaces take m/s for excess speeds, degrees
// for angles and days for times; internal two-body math uses km, km/s,
// seconds and radians.

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kDegPerRad = 180.0 / kPi;
constexpr double kRadPerDeg = kPi / 180.0;
constexpr double kSecondsPerDay = 86400.0;

/// Default Saturn gravitational parameter, km^3/s^2 (overridable in config).
constexpr double kGmSaturn = 37931207.0;

enum class MoonId : int { Titan = 0, Rhea = 1, Dione = 2, Tethys = 3, Enceladus = 4 };
constexpr int kMoonCount = 5;

/// Physical and orbital constants for one moon plus the flyby-altitude floor.
/// e and i are stored for completeness but unused by the coplanar dynamics.
struct MoonParams {
    std::string name;
    double a_km = 0.0;           // orbit semimajor axis about Saturn
    double e = 0.0;              // orbit eccentricity (stored, unused)
    double i_deg = 0.0;          // orbit inclination (stored, unused)
    double radius_km = 0.0;      // mean physical radius
    double period_days = 0.0;    // sidereal orbit period
    double gm = 0.0;             // gravitational parameter, km^3/s^2
    double min_flyby_alt_km = 0.0;
};

/// Saturn plus the five tour moons, ordered outer to inner
/// (Titan, Rhea, Dione, Tethys, Enceladus).
struct SystemModel {
    double gm_saturn = kGmSaturn;
    std::array<MoonParams, kMoonCount> moons;

    const MoonParams& moon(MoonId id) const { return moons[static_cast<int>(id)]; }
    const MoonParams& moon(int idx) const { return moons[static_cast<size_t>(idx)]; }
};

/// Built-in constants table (also shipped as data/moon_constants.txt).
SystemModel default_system();

/// Index for a case-insensitive moon name; -1 when unknown.
int moon_index(std::string_view name);

/// Elliptic orbit about Saturn described by shape + angular momentum.
struct ConicOrbit {
    double a_km = 0.0;   // semimajor axis
    double e = 0.0;      // eccentricity in [0,1)
    double h = 0.0;      // angular momentum, km^2/s

    double periapsis_km() const { return a_km * (1.0 - e); }
    double apoapsis_km() const { return a_km * (1.0 + e); }
    double period_s(double gm_s) const;
};

/// Excess-velocity state at a moon encounter. alpha is the signed pump
/// angle: positive = outbound geometry, negative = inbound.
struct FlybyState {
    double vinf_mps = 0.0;
    double alpha_deg = 0.0;
};

/// Circular orbital speed sqrt(GM_S/a) of a moon, km/s.
double circular_velocity(const MoonParams& moon, const SystemModel& sys);

/// Spacecraft speed right after a flyby (law of cosines on the velocity
/// triangle). Inputs km/s, alpha in degrees; magnitude only, sign-free.
double sc_speed_after_flyby(double v_moon_kms, double vinf_kms, double alpha_deg);

/// Angular momentum of the post-flyby orbit: r_M (V_M + V_inf cos alpha).
double sc_angular_momentum(double r_moon_km, double v_moon_kms, double vinf_kms,
                           double alpha_deg);

/// Post-flyby conic from a flyby state at a moon's orbit radius.
/// Fails with HyperbolicOrbit when the state escapes Saturn.
Result<ConicOrbit> conic_from_flyby(const MoonParams& moon, const SystemModel& sys,
                                    const FlybyState& state);

/// Maximum bend angle (degrees) a single unpowered flyby can produce:
/// 2 asin(1/(1 + mu vinf^2)), mu = (r_M + min_alt)/GM_M with vinf in km/s.
double max_bend_angle(const MoonParams& moon, double vinf_mps);

/// Flyby altitude (km) that realizes a given bend angle; inverse of
/// max_bend_angle's kernel. Bends too small to need the moon return a huge
/// altitude which callers clamp; bends above the floor's capability fail.
Result<double> altitude_for_bend(const MoonParams& moon, double vinf_mps, double bend_deg);

/// True anomaly (degrees, principal value in [0,180]) at radius r on an
/// orbit. CircularOrbit degeneracy (e < 1e-12) returns 0 with flag=false.
struct AnomalyAtRadius {
    double f_deg = 0.0;
    bool well_defined = true;
};
Result<AnomalyAtRadius> true_anomaly_at_radius(const ConicOrbit& orbit, double r_km,
                                               double gm_s);

/// Kepler time from periapsis to true anomaly f (degrees in (-180,180]);
/// odd in f, zero at periapsis. Seconds.
double time_from_periapsis(const ConicOrbit& orbit, double f_deg, double gm_s);

/// Orbit-insertion impulse at a moon: arrive hyperbolic with vinf, burn to
/// a circular orbit of altitude h. Inputs m/s and km; output m/s.
double orbit_insertion_dv(double vinf_mps, const MoonParams& moon, double alt_km);

// --- internal two-body kernels (radians / nondimensional friendly) ---
namespace kepler {

/// Conic elements from a polar state (r, vr, vt) about center gm.
/// Returns false for non-elliptic energy or degenerate h.
struct Elements {
    double a = 0.0, e = 0.0, h = 0.0;
    double f = 0.0;  // true anomaly at the state point, sign(f) = sign(vr)
};
bool elements_from_state(double gm, double r, double vr, double vt, Elements& out);

double radius(double a, double e, double f);

/// Eccentric anomaly from true anomaly, branch-safe near f = pi.
double eccentric_from_true(double e, double f);

/// Time from periapsis for principal f in (-pi, pi], seconds (gm units).
double time_from_periapsis_rad(double gm, double a, double e, double f);

/// Time from periapsis for an unwrapped anomaly (any number of revs).
double unwrapped_time(double gm, double a, double e, double f);

/// Polar velocity components (vr, vt) at anomaly f on an orbit.
void velocity(double gm, double e, double h, double f, double& vr, double& vt);

}  // namespace kepler

}  // namespace pumpdown
