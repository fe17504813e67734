#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pumpdown/astro.hpp"
#include "pumpdown/errors.hpp"
#include "pumpdown/resonance.hpp"

namespace pumpdown {

/// One powered transfer problem: the spacecraft leaves an encounter with
/// excess speed vinf + dvinf, performs a single deep-space impulse, and
/// returns to the moon with excess speed vinf - dvinf.
struct LegProblem {
    ResonanceFamily family;
    double vinf_mps = 0.0;   // mean excess speed (the ballistic anchor)
    double dvinf_mps = 0.0;  // half-split between departure and arrival
};

/// Locally optimal single-impulse leg. Angles in degrees, times in days.
struct OptimalLeg {
    double dv_mps = 0.0;          // impulse magnitude at the junction
    double tof_days = 0.0;        // encounter-to-encounter time
    double theta1_deg = 0.0;      // departure -> junction transfer angle
    double theta2_deg = 0.0;      // junction -> arrival transfer angle
    double alpha_dep_deg = 0.0;   // pump angle at departure
    double alpha_arr_deg = 0.0;   // pump angle at arrival
    double dt1_days = 0.0;        // time along the forward (departure) arc
    double dt2_days = 0.0;        // time along the backward (arrival) arc
    double vinf_dep_mps = 0.0;
    double vinf_arr_mps = 0.0;
    double junction_radius_km = 0.0;
    double position_miss_km = 0.0;  // |r_forward - r_backward| at the junction
    double time_miss_days = 0.0;    // |dt1 - (tof - dt2)|
};

/// Solve the leg. dvinf = 0 returns the ballistic transfer with dv = 0.
/// Otherwise the junction point and both pump angles are optimized by
/// continuation from the ballistic seed in steps of at most ~10 m/s of
/// split, which keeps the solution on the seed's branch.
/// Errors: SeedInfeasible (no ballistic anchor, or a split speed is not
/// positive), SolverDiverged (continuation lost the branch).
Result<OptimalLeg> solve_leg(const MoonParams& moon, const SystemModel& sys,
                             const LegProblem& problem);

/// One database row: ballistic transfer plus first-order sensitivities to
/// the impulse magnitude (signed; positive raises the departure speed).
struct ViltRecord {
    int moon_idx = 0;
    ResonanceFamily family;
    double vinf_mps = 0.0;
    double tof_days = 0.0;
    double alpha_deg = 0.0;
    double dtof_dDV = 0.0;       // days per m/s
    double dvinfdep_dDV = 0.0;   // m/s per m/s (> 0)
    double dvinfarr_dDV = 0.0;   // m/s per m/s (< 0)
    double dalphadep_dDV = 0.0;  // deg per m/s
    double dalphaarr_dDV = 0.0;  // deg per m/s
};

/// All records of one moon, aligned on a shared excess-speed grid. A grid
/// slot may be empty for a family (infeasible there, or the perturbed solve
/// was rejected); interpolation requires both interval endpoints present.
struct MoonTable {
    int moon_idx = 0;
    std::vector<double> grid_mps;  // strictly increasing
    struct FamilyRows {
        ResonanceFamily family;
        std::vector<char> present;       // aligned with grid_mps
        std::vector<ViltRecord> record;  // aligned with grid_mps
    };
    std::vector<FamilyRows> families;  // sorted by (M, N, p, q)

    const FamilyRows* find(const ResonanceFamily& fam) const;
};

/// Per-moon tables, index-aligned with SystemModel::moons.
struct ViltDatabase {
    std::vector<MoonTable> moons;
};

struct BuildStats {
    int grid_points = 0;
    int families = 0;
    int records = 0;      // solved and kept
    int infeasible = 0;   // family unreachable at that grid speed
    int dropped = 0;      // perturbed solve failed or failed quality guards
};

/// Build one moon's table: grid from vmin to vmax in fixed steps (vmax
/// appended when the last step overshoots); per feasible (family, grid
/// point) one ballistic solve and one perturbed solve at +5 m/s split.
/// Per-record failures are dropped, never fatal. Deterministic for any
/// worker count: each record depends only on its own inputs and results
/// are assembled by slot.
MoonTable build_moon_table(const MoonParams& moon, const SystemModel& sys,
                           const VinfWindow& window, double grid_step_mps,
                           int workers, BuildStats* stats = nullptr);

/// Query the table at an excess speed. Exact at grid points (returns the
/// stored record bit-for-bit); piecewise-linear between adjacent present
/// records; OutOfSpan outside the family's recorded span or across a
/// dropped slot.
Result<ViltRecord> interpolate(const MoonTable& table, const ResonanceFamily& fam,
                               double vinf_mps);

/// Linear leveraging model built on a record.
struct LegEstimate {
    double dv_mps = 0.0;       // signed impulse (magnitude is the cost)
    double tof_days = 0.0;
    double vinf_dep_mps = 0.0;
    double vinf_arr_mps = 0.0;
    double alpha_dep_deg = 0.0;
    double alpha_arr_deg = 0.0;
};

/// Impulse needed so the leg departs at required_vinf_dep:
/// dv = (required - record.vinf)/ (d vinf_dep / d dv); remaining fields are
/// ballistic value + sensitivity * dv. Errors: DeltaVCapExceeded when
/// |dv| > dv_cap; BelowFamilyFloor when the arrival speed falls below the
/// family's feasibility floor.
Result<LegEstimate> leg_from_departure(const MoonParams& moon, const SystemModel& sys,
                                       const ViltRecord& rec, double required_vinf_dep_mps,
                                       double dv_cap_mps);

/// Smallest excess speed at which a family's velocity triangle closes:
/// |V_SC - V_M| in m/s.
double family_vinf_floor_mps(const MoonParams& moon, const SystemModel& sys,
                             const ResonanceFamily& fam);

/// CSV serialization. Columns exactly:
/// moon,M,N,p,q,vinf_mps,tof_days,alpha_deg,dtof_dDV_days_per_mps,
/// dvinfdep_dDV,dvinfarr_dDV,dalphadep_dDV_deg_per_mps,
/// dalphaarr_dDV_deg_per_mps
/// sorted ascending by (moon index, M, N, p, q, vinf); 12 significant
/// digits. One file per database (all moons) or per moon table.
void write_database_csv(std::ostream& os, const ViltDatabase& db,
                        const SystemModel& sys);
void write_moon_table_csv(std::ostream& os, const MoonTable& table,
                          const SystemModel& sys);
Result<ViltDatabase> read_database_csv(std::istream& is, const SystemModel& sys);

}  // namespace pumpdown
