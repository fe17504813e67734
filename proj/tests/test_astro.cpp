#include "doctest.h"
#include "pumpdown/astro.hpp"

#include <cmath>
#include <random>

using namespace pumpdown;

static const SystemModel kSys = default_system();

TEST_CASE("circular moon speeds match independently computed values") {
    CHECK(circular_velocity(kSys.moon(MoonId::Titan), kSys) ==
          doctest::Approx(5.571676).epsilon(1e-6));
    CHECK(circular_velocity(kSys.moon(MoonId::Rhea), kSys) ==
          doctest::Approx(8.482982).epsilon(1e-6));
    CHECK(circular_velocity(kSys.moon(MoonId::Dione), kSys) ==
          doctest::Approx(10.025353).epsilon(1e-6));
    CHECK(circular_velocity(kSys.moon(MoonId::Tethys), kSys) ==
          doctest::Approx(11.346658).epsilon(1e-6));
    CHECK(circular_velocity(kSys.moon(MoonId::Enceladus), kSys) ==
          doctest::Approx(12.625753).epsilon(1e-6));
}

TEST_CASE("stored periods agree with Kepler's third law") {
    for (int i = 0; i < kMoonCount; ++i) {
        const MoonParams& m = kSys.moon(i);
        const double t_kepler =
            2.0 * kPi * std::sqrt(m.a_km * m.a_km * m.a_km / kSys.gm_saturn) / kSecondsPerDay;
        CHECK(m.period_days == doctest::Approx(t_kepler).epsilon(5e-3));
    }
}

TEST_CASE("moon_index resolves names case-insensitively") {
    CHECK(moon_index("Titan") == 0);
    CHECK(moon_index("rhea") == 1);
    CHECK(moon_index("ENCELADUS") == 4);
    CHECK(moon_index("Mimas") == -1);
}

TEST_CASE("max bend angle at reference states") {
    CHECK(max_bend_angle(kSys.moon(MoonId::Enceladus), 450.0) ==
          doctest::Approx(13.074914).epsilon(1e-6));
    CHECK(max_bend_angle(kSys.moon(MoonId::Titan), 1460.0) ==
          doctest::Approx(60.292991).epsilon(1e-6));
}

TEST_CASE("altitude_for_bend inverts the bend kernel") {
    for (int i = 0; i < kMoonCount; ++i) {
        const MoonParams& m = kSys.moon(i);
        const double v = 300.0 + 250.0 * i;
        const double dmax = max_bend_angle(m, v);
        auto at_max = altitude_for_bend(m, v, dmax);
        REQUIRE(at_max.ok());
        CHECK(*at_max == doctest::Approx(m.min_flyby_alt_km).epsilon(1e-9));
        auto half = altitude_for_bend(m, v, dmax / 2.0);
        REQUIRE(half.ok());
        CHECK(*half > m.min_flyby_alt_km);
        CHECK_FALSE(altitude_for_bend(m, v, dmax * 1.01).ok());
        CHECK(altitude_for_bend(m, v, 0.0).ok());  // no bend: unbounded altitude
    }
}

TEST_CASE("orbit insertion impulse at Enceladus reference arrivals") {
    const MoonParams& enc = kSys.moon(MoonId::Enceladus);
    CHECK(orbit_insertion_dv(440.0, enc, 100.0) == doctest::Approx(341.212124).epsilon(1e-6));
    CHECK(orbit_insertion_dv(386.0, enc, 100.0) == doctest::Approx(292.736548).epsilon(1e-6));
}

TEST_CASE("conic_from_flyby reproduces a 2:1 resonant orbit at Rhea") {
    // At Rhea with vinf = 1826 m/s, a pump angle of 41.243709 deg puts the
    // spacecraft on an orbit whose period is exactly twice Rhea's.
    const MoonParams& rhea = kSys.moon(MoonId::Rhea);
    auto orbit = conic_from_flyby(rhea, kSys, {1826.0, 41.243709});
    REQUIRE(orbit.ok());
    CHECK(orbit->a_km == doctest::Approx(rhea.a_km * std::pow(2.0, 2.0 / 3.0)).epsilon(1e-6));
    CHECK(orbit->e > 0.0);
    CHECK(orbit->e < 1.0);
    // Flyby point must lie on the conic between periapsis and apoapsis.
    CHECK(orbit->periapsis_km() <= rhea.a_km * (1 + 1e-12));
    CHECK(orbit->apoapsis_km() >= rhea.a_km * (1 - 1e-12));
}

TEST_CASE("conic_from_flyby rejects escape states") {
    // 22 km/s excess speed at Enceladus is far above Saturn escape there.
    auto orbit = conic_from_flyby(kSys.moon(MoonId::Enceladus), kSys, {22000.0, 0.0});
    CHECK_FALSE(orbit.ok());
    CHECK(orbit.error() == ErrorCode::HyperbolicOrbit);
}

TEST_CASE("true anomaly at radius: degenerate, interior, and out-of-range") {
    ConicOrbit circ{527108.0, 0.0, std::sqrt(kGmSaturn * 527108.0)};
    auto deg = true_anomaly_at_radius(circ, 527108.0, kGmSaturn);
    REQUIRE(deg.ok());
    CHECK(deg->well_defined == false);
    CHECK(deg->f_deg == 0.0);

    auto orbit = conic_from_flyby(kSys.moon(MoonId::Rhea), kSys, {900.0, 60.0});
    REQUIRE(orbit.ok());
    auto at_peri = true_anomaly_at_radius(*orbit, orbit->periapsis_km(), kGmSaturn);
    REQUIRE(at_peri.ok());
    CHECK(at_peri->f_deg == doctest::Approx(0.0).epsilon(1e-6));
    auto at_apo = true_anomaly_at_radius(*orbit, orbit->apoapsis_km(), kGmSaturn);
    REQUIRE(at_apo.ok());
    CHECK(at_apo->f_deg == doctest::Approx(180.0).epsilon(1e-9));
    auto beyond = true_anomaly_at_radius(*orbit, orbit->apoapsis_km() * 1.01, kGmSaturn);
    CHECK_FALSE(beyond.ok());
    CHECK(beyond.error() == ErrorCode::RadiusOutOfRange);

    // Round trip: radius(f(r)) == r across the reachable range.
    for (double frac : {0.1, 0.35, 0.6, 0.9}) {
        const double r =
            orbit->periapsis_km() + frac * (orbit->apoapsis_km() - orbit->periapsis_km());
        auto f = true_anomaly_at_radius(*orbit, r, kGmSaturn);
        REQUIRE(f.ok());
        CHECK(kepler::radius(orbit->a_km, orbit->e, f->f_deg * kRadPerDeg) ==
              doctest::Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("time from periapsis is odd in f and spans half a period") {
    auto orbit = conic_from_flyby(kSys.moon(MoonId::Dione), kSys, {800.0, 45.0});
    REQUIRE(orbit.ok());
    CHECK(time_from_periapsis(*orbit, 0.0, kGmSaturn) == 0.0);
    for (double f : {10.0, 60.0, 120.0, 179.0}) {
        const double tp = time_from_periapsis(*orbit, f, kGmSaturn);
        const double tm = time_from_periapsis(*orbit, -f, kGmSaturn);
        CHECK(tp > 0.0);
        CHECK(tp == doctest::Approx(-tm).epsilon(1e-12));
    }
    CHECK(time_from_periapsis(*orbit, 180.0, kGmSaturn) ==
          doctest::Approx(0.5 * orbit->period_s(kGmSaturn)).epsilon(1e-12));
}

TEST_CASE("kepler state round trip and unwrapped time") {
    std::mt19937_64 rng(20260814ull);
    std::uniform_real_distribution<double> ua(2.0e5, 1.5e6);
    std::uniform_real_distribution<double> ue(0.01, 0.85);
    std::uniform_real_distribution<double> uf(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        const double a = ua(rng), e = ue(rng), f = uf(rng);
        const double h = std::sqrt(kGmSaturn * a * (1.0 - e * e));
        const double r = kepler::radius(a, e, f);
        double vr, vt;
        kepler::velocity(kGmSaturn, e, h, f, vr, vt);
        kepler::Elements el;
        REQUIRE(kepler::elements_from_state(kGmSaturn, r, vr, vt, el));
        CHECK(el.a == doctest::Approx(a).epsilon(1e-10));
        CHECK(el.e == doctest::Approx(e).epsilon(1e-9));
        CHECK(el.f == doctest::Approx(f).epsilon(1e-9));
    }

    // Unwrapped time: adding a revolution adds one period; monotone in f.
    const double a = 8.0e5, e = 0.4;
    const double period = 2.0 * kPi * std::sqrt(a * a * a / kGmSaturn);
    for (double f : {-2.0, 0.3, 2.9}) {
        const double t0 = kepler::unwrapped_time(kGmSaturn, a, e, f);
        const double t1 = kepler::unwrapped_time(kGmSaturn, a, e, f + 2.0 * kPi);
        CHECK(t1 - t0 == doctest::Approx(period).epsilon(1e-12));
    }
    double prev = kepler::unwrapped_time(kGmSaturn, a, e, -10.0);
    for (double f = -9.9; f < 10.0; f += 0.1) {
        const double t = kepler::unwrapped_time(kGmSaturn, a, e, f);
        CHECK(t > prev);
        prev = t;
    }
}

TEST_CASE("error names cover the taxonomy") {
    CHECK(std::string(error_name(ErrorCode::None)) == "None");
    CHECK(std::string(error_name(ErrorCode::HyperbolicOrbit)) == "HyperbolicOrbit");
    CHECK(std::string(error_name(ErrorCode::DeltaVCapExceeded)) == "DeltaVCapExceeded");
    CHECK(std::string(error_name(ErrorCode::UnknownTourId)) == "UnknownTourId");
}
