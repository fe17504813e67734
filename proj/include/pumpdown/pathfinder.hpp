#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pumpdown/astro.hpp"
#include "pumpdown/errors.hpp"
#include "pumpdown/resonance.hpp"
#include "pumpdown/vilt.hpp"

namespace pumpdown {

/// Tuning knobs of the staged tour search. Defaults are the production
/// values; tests override them for small instances.
struct SearchParams {
    int start_moon_idx = 0;  // outermost moon of the chain to search from
    double start_vinf_mps = 1460.0;
    double start_alpha_deg = 50.0;   // arrival pump magnitude at the start
    double tof_cap_days = 3.0 * 365.25;
    double dp_grid_step_mps = 30.0;  // branch-target spacing over each window
    double dv_cap_mps = 100.0;       // per-leg maneuver bound
    double eoi_trigger_vinf_mps = 450.0;
    double eoi_altitude_km = 100.0;
    int max_flybys_per_moon = 40;  // <= 0 disables the cap
    bool bins_enabled = true;
    double bin_tof_days = 5.0;
    double bin_dv_mps = 1.0;
    double bin_vinf_mps = 10.0;
    double bin_alpha_divisor = 4.0;  // bin width = max bend(node V_inf)/divisor
    int workers = 1;
    std::array<VinfWindow, kMoonCount> windows = default_vinf_windows();
};

/// Objective tuple minimized by the archive: shorter time, cheaper cost,
/// larger pump magnitude (stored negated), lower excess speed.
struct ObjectiveVector {
    double tof_days = 0.0;
    double dv_mps = 0.0;
    double neg_alpha_deg = 0.0;
    double vinf_mps = 0.0;
};

/// Componentwise <= with at least one strict <.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);
/// Total order used to canonicalize candidate pools.
bool lex_less(const ObjectiveVector& a, const ObjectiveVector& b);

/// One database transfer taken between two flybys of the same moon.
struct SearchLeg {
    ResonanceFamily family;
    double dv_mps = 0.0;  // signed impulse; |dv| is the cost added
    double tof_days = 0.0;
    double alpha_dep_deg = 0.0;
    double alpha_arr_deg = 0.0;
    double vinf_dep_mps = 0.0;
    double vinf_arr_mps = 0.0;
};

enum class NodeLink : std::uint8_t {
    Root,     // initial condition
    Leg,      // flyby + same-moon transfer from the parent
    Handoff,  // max-bend exit flyby at the parent's moon, arrival here
};

/// One search state: the craft arriving at a moon with a given excess speed
/// and pump magnitude, plus the accumulated objectives and the parent chain.
/// entry_sign is the encounter side (+1 outbound, -1 inbound) the next
/// transfer must depart on. Same-direction families run on either side (the
/// mirrored twin has identical numbers) and keep the side; the two
/// mixed-direction 1:1 geometries are distinct, require a matching departure
/// side, and flip it on arrival.
struct PathNode {
    int moon_idx = 0;
    double vinf_mps = 0.0;
    double alpha_deg = 0.0;  // arrival pump magnitude
    double tof_days = 0.0;   // cumulative
    double dv_mps = 0.0;     // cumulative
    int flybys = 0;          // flybys performed at this moon so far
    std::int8_t entry_sign = 0;
    NodeLink link = NodeLink::Root;
    std::int32_t parent = -1;  // pool index, -1 for roots
    SearchLeg leg;             // meaningful when link == Leg
    std::uint64_t birth = 0;   // deterministic tie-break key within a stage
};

using NodePool = std::vector<PathNode>;

ObjectiveVector objective(const PathNode& node);

/// Departure-pump window reachable across one flyby from an arrival pump of
/// alpha_arr given the maximum bend: [max(0, a - b), min(180, a + b)].
void admissible_alpha_window(double alpha_arr_deg, double max_bend_deg, double& lo_deg,
                             double& hi_deg);

/// All feasible one-transfer children of a node: every database family and
/// every branch-target arrival speed that passes the bend window, the
/// per-leg maneuver cap, the family floor, the time cap, and the per-moon
/// flyby cap. Children carry vinf_mps equal to the target exactly.
std::vector<PathNode> branch(const NodePool& pool, std::int32_t node_id,
                             const MoonTable& table, const std::vector<double>& targets_mps,
                             const MoonParams& moon, const SystemModel& sys,
                             const SearchParams& par);

/// Branch-target list for a window: vmin + k*step while <= vmax (vmax
/// appended when the last step misses it), matching the database grid rule.
std::vector<double> branch_targets(const VinfWindow& window, double step_mps);

/// Keep the exactly non-dominated subset (per entry_sign class), then, when
/// bins are enabled, at most one representative per objective-space bin
/// (keeper = lexicographic minimum, ties broken by birth key). Deterministic
/// for any input order.
std::vector<PathNode> pareto_prune(std::vector<PathNode> candidates, const MoonParams& moon,
                                   const SystemModel& sys, const SearchParams& par,
                                   bool bins_enabled);

/// Same prune, but labels compete only within their search state: the pair
/// (entry side, exact excess speed). Used between stages, where candidate
/// speeds sit exactly on the branch-target grid; labels at different states
/// have different onward options and must not discard one another.
std::vector<PathNode> pareto_prune_states(std::vector<PathNode> candidates,
                                          const MoonParams& moon, const SystemModel& sys,
                                          const SearchParams& par, bool bins_enabled);

/// Outcome of the unpowered max-bend exit flyby at moon1 and the conic coast
/// down to moon2's orbit radius.
struct ExitState {
    double alpha_dep_deg = 0.0;  // departure pump magnitude at moon1
    double a_sc_km = 0.0;        // SC orbit between the moons
    double e_sc = 0.0;
    double rp_sc_km = 0.0;
    double vinf_arr_mps = 0.0;   // arrival excess speed at moon2
    double alpha_arr_deg = 0.0;  // arrival pump magnitude at moon2 (inbound)
};

/// Handoff test: apply the maximum bend at the node's moon, coast to the
/// next moon's radius, and accept when the transfer periapsis reaches it and
/// the arrival excess speed lies inside the next window. The inter-moon
/// phasing time is ignored by this model (contributes zero days).
std::optional<ExitState> exit_feasible(const PathNode& node, const MoonParams& moon1,
                                       const MoonParams& moon2, const VinfWindow& window2,
                                       const SystemModel& sys);

/// Insertion burn from a hyperbolic arrival into a circular orbit at the
/// given altitude, m/s.
double eoi_delta_v(double vinf_mps, const MoonParams& moon, double altitude_km);

/// A path closed by the insertion burn at the innermost moon.
struct CompletedTour {
    std::int32_t node_id = -1;  // node whose state paid the insertion burn
    double tof_days = 0.0;      // total
    double dv_mps = 0.0;        // total including the insertion burn
    double eoi_dv_mps = 0.0;
    double terminal_vinf_mps = 0.0;
};

/// Non-dominated subset under (tof, dv), deduplicated, sorted by time.
std::vector<CompletedTour> pareto_prune_2d(std::vector<CompletedTour> tours);

/// One line of search progress: archive size entering the stage and how many
/// of its members exited (handoff) or closed (insertion) at that stage.
struct StageDiag {
    int moon_idx = 0;
    int stage = 0;
    std::size_t archive_size = 0;
    std::size_t harvested = 0;
};
using DiagSink = std::function<void(const StageDiag&)>;

struct MoonPhaseResult {
    std::vector<std::int32_t> harvested;  // next-moon arrival nodes (pool ids)
    std::vector<CompletedTour> completed; // only for the innermost moon
};

/// Staged branch/prune search at one moon. Every stage first harvests from
/// the current archive (handoff to next_moon_idx, or insertion closures when
/// next_moon_idx < 0), then branches and prunes; harvested nodes stay active.
/// Errors: EmptyFront when nothing ever exits or closes.
Result<MoonPhaseResult> run_moon_tour(NodePool& pool, const std::vector<std::int32_t>& initial,
                                      int moon_idx, int next_moon_idx, const MoonTable& table,
                                      const SystemModel& sys, const SearchParams& par,
                                      const DiagSink& diag);

/// Pruned arrival front at one moon (cumulative objectives of handoff nodes).
struct MoonFront {
    int moon_idx = 0;  // arrival moon
    std::vector<std::int32_t> node_ids;
};

struct TourRunResult {
    NodePool pool;
    std::vector<MoonFront> fronts;         // one per inter-moon handoff
    std::vector<CompletedTour> completed;  // 2D-pruned, sorted by time
    std::size_t completed_total = 0;       // closures before 2D filtering
};

/// Resumable boundary between phases: the nodes accumulated so far and the
/// archive (all at moon_idx) the next phase will expand.
struct PhaseState {
    NodePool pool;
    std::vector<std::int32_t> archive;
    int moon_idx = 0;
};
using PhaseSink = std::function<void(const PhaseState&)>;

/// Full chain from the start moon to the innermost moon. after_phase (may be
/// empty) receives the resume state after every phase with a successor;
/// resume (may be null) starts from a previously captured state instead of
/// the root of `par`. Errors: EmptyFront.
Result<TourRunResult> run_full_tour(const ViltDatabase& db, const SystemModel& sys,
                                    const SearchParams& par, const DiagSink& diag,
                                    const PhaseSink& after_phase = {},
                                    const PhaseState* resume = nullptr);

/// One row of a flyby table: a numbered flyby followed by the transfer it
/// sets up ("M:N^(p,q)"), or the exit flyby row named after the next moon,
/// or the terminal insertion row ("EOI"). Rows without a transfer carry
/// has_tof/has_dv = false.
struct FlybyRow {
    int moon_idx = 0;     // section the row belongs to
    int flyby_index = 0;  // 1-based within the section
    std::string type;
    bool has_tof = false;
    bool has_dv = false;
    double tof_days = 0.0;
    double alt_km = 0.0;
    double vinf_mps = 0.0;  // excess speed at this flyby
    double dv_mps = 0.0;
};

struct TourRecord {
    std::vector<FlybyRow> rows;
    std::array<double, kMoonCount> moon_tof_days{};
    std::array<double, kMoonCount> moon_dv_mps{};
    std::array<int, kMoonCount> moon_flybys{};
    double eoi_dv_mps = 0.0;
    double terminal_vinf_mps = 0.0;
    double total_tof_days = 0.0;
    double total_dv_mps = 0.0;
};

/// Rebuild the flyby-by-flyby table of a completed tour from its parent
/// chain: per-leg rows with transfer labels sign-matched so each arrival
/// side equals the next departure side, flyby altitudes recovered from the
/// bend each flyby performs, the exit flybys at minimum altitude, and the
/// final insertion row. Errors: InconsistentChain when the chain's links or
/// speeds do not line up.
Result<TourRecord> reconstruct_tour(const NodePool& pool, const CompletedTour& tour,
                                    const SystemModel& sys, const SearchParams& par);

/// Checkpoint of a finished phase: the node pool slice reachable from the
/// archive plus the archive itself (and closures at the innermost moon).
struct Checkpoint {
    NodePool pool;
    std::vector<std::int32_t> archive;
    std::vector<CompletedTour> completed;
};

/// Round-trip-exact CSV serialization (17 significant digits) of a
/// checkpoint. Errors: IoError, ParseError.
Result<bool> write_checkpoint_csv(const std::string& path, const NodePool& pool,
                                  const std::vector<std::int32_t>& archive,
                                  const std::vector<CompletedTour>& completed);
Result<Checkpoint> read_checkpoint_csv(const std::string& path);

}  // namespace pumpdown
