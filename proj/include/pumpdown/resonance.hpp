#pragma once

#include <array>
#include <string>
#include <vector>

#include "pumpdown/astro.hpp"
#include "pumpdown/errors.hpp"

namespace pumpdown {

/// One resonance-transfer family at a moon: the spacecraft completes N
/// revolutions while the moon completes M between two encounters. p and q
/// give the departure/arrival leg direction: +1 when the encounter sits on
/// the outbound (ascending-radius) side of the conic, -1 on the inbound side.
struct ResonanceFamily {
    int M = 1;
    int N = 1;
    int p = +1;
    int q = +1;

    bool exterior() const { return M > N; }
    /// "M:N^(+,-)" style label used in tables and logs.
    std::string label() const;
};

/// Excess-speed window and revolution cap that bound a moon's family set
/// and its transfer-database grid.
struct VinfWindow {
    double vmin_mps = 0.0;
    double vmax_mps = 0.0;
    int max_m = 1;
};

/// Stock design windows, indexed like SystemModel::moons (outermost first):
/// Titan [1200,1600] M<=2, Rhea [650,1900] M<=15, Dione [550,1000] M<=15,
/// Tethys [550,900] M<=16, Enceladus [200,850] M<=25.
std::array<VinfWindow, kMoonCount> default_vinf_windows();

/// N/M interval reachable at a given excess speed: a transfer exists only
/// when the resonant spacecraft speed fits inside [V_M - V_inf, V_M + V_inf].
void resonance_ratio_window(const MoonParams& moon, const SystemModel& sys,
                            double vinf_mps, double& lo, double& hi);

/// Family set searched at a moon: every coprime (M,N) with M <= max_m whose
/// ratio is reachable at the window's top speed, direction (+,+), plus the
/// three same-period variants (1,1,+,+), (1,1,+,-), (1,1,-,+). Sorted by
/// (M, N, p, q).
std::vector<ResonanceFamily> enumerate_families(const MoonParams& moon,
                                               const SystemModel& sys,
                                               const VinfWindow& window);

/// Extra-revolution index used by the encounter-to-encounter time equations.
int extra_rev_index(const ResonanceFamily& fam);
/// Extra-revolution index in the transfer-angle identity
/// theta1 + theta2 = 360 (N + delta) + q f - p f (zero for p = q).
int transfer_angle_rev_index(const ResonanceFamily& fam);
/// Extra-revolution index used to place the maneuver-point seed.
int placement_rev_index(const ResonanceFamily& fam);

/// Maneuver-free (ballistic) solution of one family at one excess speed.
/// Angles in degrees; seed anomalies in radians, unwrapped (they may exceed
/// pi after several revolutions) — they locate the transfer's natural
/// maneuver point on the departure and arrival conics.
struct BallisticSolution {
    double alpha_deg = 0.0;   // pump angle magnitude
    double f_deg = 0.0;       // encounter true-anomaly magnitude
    double tof_days = 0.0;
    int delta = 0;            // transfer-angle extra-rev index
    double theta1_deg = 0.0;  // departure -> maneuver point transfer angle
    double theta2_deg = 0.0;  // maneuver point -> arrival transfer angle
    double f1_seed_rad = 0.0; // maneuver-point anomaly on the departure conic
    double f2_seed_rad = 0.0; // maneuver-point anomaly on the arrival conic
};

/// Solve the ballistic transfer. Same-direction families (p = q) are closed
/// form with t_f = M * period exactly; mixed-direction families root-find
/// the pump angle that closes the phasing equation.
/// Errors: InfeasibleResonance when the excess speed cannot realize the
/// ratio, NoConvergence when the mixed-direction root is not found.
Result<BallisticSolution> solve_ballistic(const MoonParams& moon, const SystemModel& sys,
                                          const ResonanceFamily& fam, double vinf_mps);

/// Reference root-finder for mixed-direction pump angles: dense scan plus
/// plain bisection, no Newton. Kept as an independent cross-check of the
/// production path. Returns the root (deg) closest to the same-direction
/// pump angle.
Result<double> case2_alpha_bisection(const MoonParams& moon, const SystemModel& sys,
                                     const ResonanceFamily& fam, double vinf_mps);

/// One point of a pump-angle vs excess-speed map curve.
struct MapSample {
    ResonanceFamily family;
    double vinf_mps = 0.0;
    double alpha_deg = 0.0;  // magnitude
    double tof_days = 0.0;
};

/// Ballistic curve samples for plotting: one sample per feasible
/// (family, grid speed) pair, infeasible points omitted, sorted by
/// (M, N, p, q, V_inf).
std::vector<MapSample> sample_pump_vinf_map(const MoonParams& moon, const SystemModel& sys,
                                            const std::vector<ResonanceFamily>& families,
                                            const std::vector<double>& vinf_grid_mps);

}  // namespace pumpdown
