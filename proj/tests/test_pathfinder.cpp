#include "doctest.h"
#include "pumpdown/pathfinder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <tuple>

using namespace pumpdown;

static const SystemModel kSys = default_system();

namespace {

const MoonParams& titan() { return kSys.moon(MoonId::Titan); }
const MoonParams& rhea() { return kSys.moon(MoonId::Rhea); }
const MoonParams& tethys() { return kSys.moon(MoonId::Tethys); }
const MoonParams& enceladus() { return kSys.moon(MoonId::Enceladus); }

PathNode make_node(int moon_idx, double vinf_mps, double alpha_deg, int sign) {
    PathNode n;
    n.moon_idx = moon_idx;
    n.vinf_mps = vinf_mps;
    n.alpha_deg = alpha_deg;
    n.entry_sign = static_cast<std::int8_t>(sign);
    n.link = NodeLink::Root;
    return n;
}

// Rhea restricted to one interior family and the two direction-changing 1:1
// transfers, on a 5-point grid: small enough for exhaustive comparison.
const VinfWindow kTruncRheaWindow{850.0, 970.0, 7};

const MoonTable& truncated_rhea_table() {
    static const MoonTable table = [] {
        MoonTable full = build_moon_table(rhea(), kSys, kTruncRheaWindow, 30.0, 4);
        MoonTable t;
        t.moon_idx = full.moon_idx;
        t.grid_mps = full.grid_mps;
        const ResonanceFamily wanted[] = {{6, 7, +1, +1}, {1, 1, +1, -1}, {1, 1, -1, +1}};
        for (const auto& fam : wanted) {
            const MoonTable::FamilyRows* rows = full.find(fam);
            REQUIRE(rows != nullptr);
            t.families.push_back(*rows);
        }
        return t;
    }();
    return table;
}

const MoonTable& titan_table() {
    static const MoonTable table =
        build_moon_table(titan(), kSys, default_vinf_windows()[0], 30.0, 4);
    return table;
}

// The innermost moon needs intermediate-ratio families (e.g. 15:13) to climb
// its pump ladder, because its flybys bend only a few degrees at a time.
const VinfWindow kSmallTethysWindow{550.0, 900.0, 9};
const VinfWindow kSmallEnceladusWindow{390.0, 850.0, 18};

const MoonTable& small_tethys_table() {
    static const MoonTable table =
        build_moon_table(tethys(), kSys, kSmallTethysWindow, 50.0, 4);
    return table;
}

const MoonTable& small_enceladus_table() {
    static const MoonTable table =
        build_moon_table(enceladus(), kSys, kSmallEnceladusWindow, 60.0, 4);
    return table;
}

double table_alpha(const MoonTable& t, const ResonanceFamily& fam, double vinf) {
    auto rec = interpolate(t, fam, vinf);
    REQUIRE(rec.ok());
    return rec->alpha_deg;
}

std::tuple<double, double, double, double> vec_tuple(const ObjectiveVector& v) {
    return std::make_tuple(v.tof_days, v.dv_mps, v.neg_alpha_deg, v.vinf_mps);
}

}  // namespace

TEST_CASE("objective dominance is componentwise with one strict edge") {
    const ObjectiveVector a{10.0, 5.0, -120.0, 900.0};
    CHECK_FALSE(dominates(a, a));
    ObjectiveVector b = a;
    b.dv_mps = 5.5;
    CHECK(dominates(a, b));
    CHECK_FALSE(dominates(b, a));
    b.tof_days = 9.0;  // now incomparable
    CHECK_FALSE(dominates(a, b));
    CHECK_FALSE(dominates(b, a));
    CHECK(lex_less(b, a));
}

TEST_CASE("reachable pump interval is the arrival angle widened by the bend") {
    double lo = 0.0, hi = 0.0;
    admissible_alpha_window(50.0, 60.0, lo, hi);
    CHECK(lo == 0.0);
    CHECK(hi == 110.0);
    admissible_alpha_window(170.0, 30.0, lo, hi);
    CHECK(lo == 140.0);
    CHECK(hi == 180.0);
    admissible_alpha_window(10.0, 5.0, lo, hi);
    CHECK(lo == 5.0);
    CHECK(hi == 15.0);
}

TEST_CASE("branch targets step through the window and end exactly on its edge") {
    const std::vector<double> a = branch_targets({650.0, 1900.0, 1}, 30.0);
    REQUIRE(a.size() == 43);
    CHECK(a.front() == 650.0);
    CHECK(a[1] == 680.0);
    CHECK(a[41] == 1880.0);
    CHECK(a.back() == 1900.0);

    const std::vector<double> b = branch_targets({850.0, 970.0, 1}, 30.0);
    REQUIRE(b.size() == 5);
    CHECK(b.back() == 970.0);

    const std::vector<double> c = branch_targets({400.0, 400.0, 1}, 50.0);
    REQUIRE(c.size() == 1);
    CHECK(c.front() == 400.0);
}

TEST_CASE("insertion burn matches frozen references and the coasting limit") {
    CHECK(eoi_delta_v(440.0, enceladus(), 100.0) == doctest::Approx(341.212124).epsilon(1e-8));
    CHECK(eoi_delta_v(386.0, enceladus(), 100.0) == doctest::Approx(292.736548).epsilon(1e-8));
    // With no excess speed the burn is the parabolic-to-circular difference.
    const double r = enceladus().radius_km + 100.0;
    const double vc = std::sqrt(enceladus().gm / r) * 1000.0;
    CHECK(eoi_delta_v(0.0, enceladus(), 100.0) ==
          doctest::Approx((std::sqrt(2.0) - 1.0) * vc).epsilon(1e-12));
}

TEST_CASE("exit handoff reproduces frozen anchors along the chain") {
    const auto windows = default_vinf_windows();

    SUBCASE("outbound from the second moon to the third") {
        const PathNode n = make_node(1, 860.0, 125.767157, -1);
        auto es = exit_feasible(n, rhea(), kSys.moon(2), windows[2], kSys);
        REQUIRE(es.has_value());
        CHECK(es->alpha_dep_deg == doctest::Approx(149.270590).epsilon(1e-8));
        CHECK(es->vinf_arr_mps == doctest::Approx(947.741602).epsilon(1e-7));
        CHECK(es->alpha_arr_deg == doctest::Approx(33.500922).epsilon(1e-7));
        CHECK(es->rp_sc_km == doctest::Approx(374372.814).epsilon(1e-8));
        CHECK(es->a_sc_km == doctest::Approx(452837.354).epsilon(1e-8));
        CHECK(es->e_sc == doctest::Approx(0.173273119).epsilon(1e-7));
        // transfer perijove must actually reach the next orbit
        CHECK(es->rp_sc_km <= kSys.moon(2).a_km);
        CHECK(es->alpha_dep_deg ==
              doctest::Approx(125.767157 + max_bend_angle(rhea(), 860.0)).epsilon(1e-12));
    }
    SUBCASE("fourth moon to the innermost") {
        const PathNode n = make_node(3, 690.0, 142.742500, -1);
        auto es = exit_feasible(n, tethys(), enceladus(), windows[4], kSys);
        REQUIRE(es.has_value());
        CHECK(es->alpha_dep_deg == doctest::Approx(157.640168).epsilon(1e-8));
        CHECK(es->vinf_arr_mps == doctest::Approx(817.981440).epsilon(1e-8));
        CHECK(es->alpha_arr_deg == doctest::Approx(39.277839).epsilon(1e-7));
        CHECK(es->rp_sc_km == doctest::Approx(236094.568).epsilon(1e-8));
    }
    SUBCASE("start moon to its neighbor") {
        const PathNode n = make_node(0, 1320.0, 96.880697, -1);
        auto es = exit_feasible(n, titan(), rhea(), windows[1], kSys);
        REQUIRE(es.has_value());
        CHECK(es->alpha_dep_deg == doctest::Approx(163.947313).epsilon(1e-8));
        CHECK(es->vinf_arr_mps == doctest::Approx(1791.976889).epsilon(1e-7));
        CHECK(es->alpha_arr_deg == doctest::Approx(33.634162).epsilon(1e-7));
    }
    SUBCASE("a fresh start-state cannot exit yet") {
        const PathNode n = make_node(0, 1460.0, 50.0, +1);
        CHECK_FALSE(exit_feasible(n, titan(), rhea(), windows[1], kSys).has_value());
    }
    SUBCASE("no excess speed means no escape") {
        const PathNode n = make_node(1, 0.0, 120.0, -1);
        CHECK_FALSE(exit_feasible(n, rhea(), kSys.moon(2), windows[2], kSys).has_value());
    }
    SUBCASE("the receiving window gates the arrival speed") {
        const PathNode n = make_node(0, 1320.0, 96.880697, -1);
        CHECK_FALSE(exit_feasible(n, titan(), rhea(), {650.0, 1700.0, 15}, kSys).has_value());
        CHECK_FALSE(exit_feasible(n, titan(), rhea(), {1800.0, 1900.0, 15}, kSys).has_value());
    }
}

TEST_CASE("pruning equals the quadratic reference on random candidate pools") {
    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> utof(0.0, 100.0), udv(0.0, 50.0),
        ualpha(0.0, 180.0), uvinf(650.0, 1900.0);
    std::vector<PathNode> pool;
    for (int i = 0; i < 600; ++i) {
        PathNode n = make_node(1, uvinf(rng), ualpha(rng), (i & 1) ? +1 : -1);
        n.tof_days = utof(rng);
        n.dv_mps = udv(rng);
        n.birth = static_cast<std::uint64_t>(i);
        pool.push_back(n);
    }
    // exact duplicates must collapse onto the earliest-born copy
    for (int i = 0; i < 60; ++i) {
        PathNode dup = pool[static_cast<size_t>(i * 7)];
        dup.birth = 600u + static_cast<std::uint64_t>(i);
        pool.push_back(dup);
    }

    SearchParams par;
    auto reference = [&](const std::vector<PathNode>& in) {
        std::set<std::uint64_t> kept;
        for (const PathNode& a : in) {
            bool drop = false;
            for (const PathNode& b : in) {
                if (b.entry_sign != a.entry_sign) continue;
                if (dominates(objective(b), objective(a))) {
                    drop = true;
                    break;
                }
                if (vec_tuple(objective(b)) == vec_tuple(objective(a)) && b.birth < a.birth)
                    drop = true;
            }
            if (!drop) kept.insert(a.birth);
        }
        return kept;
    };
    const std::set<std::uint64_t> expect = reference(pool);

    std::vector<PathNode> pruned = pareto_prune(pool, rhea(), kSys, par, false);
    std::set<std::uint64_t> got;
    for (const PathNode& n : pruned) got.insert(n.birth);
    CHECK(got == expect);

    // order independence: shuffles give the same kept set in the same order
    std::vector<std::uint64_t> base_order;
    for (const PathNode& n : pruned) base_order.push_back(n.birth);
    for (int s = 0; s < 3; ++s) {
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<PathNode> again = pareto_prune(pool, rhea(), kSys, par, false);
        std::vector<std::uint64_t> order;
        for (const PathNode& n : again) order.push_back(n.birth);
        CHECK(order == base_order);
    }
}

TEST_CASE("binned thinning keeps a subset and stays order independent") {
    std::mt19937 rng(77u);
    std::uniform_real_distribution<double> utof(0.0, 200.0), udv(0.0, 80.0),
        ualpha(0.0, 180.0), uvinf(650.0, 1900.0);
    std::vector<PathNode> pool;
    for (int i = 0; i < 500; ++i) {
        PathNode n = make_node(1, uvinf(rng), ualpha(rng), (i % 3 == 0) ? -1 : +1);
        n.tof_days = utof(rng);
        n.dv_mps = udv(rng);
        n.birth = static_cast<std::uint64_t>(i);
        pool.push_back(n);
    }
    SearchParams par;
    const std::vector<PathNode> exact = pareto_prune(pool, rhea(), kSys, par, false);
    const std::vector<PathNode> binned = pareto_prune(pool, rhea(), kSys, par, true);
    CHECK(binned.size() <= exact.size());
    CHECK(!binned.empty());
    std::set<std::uint64_t> exact_ids;
    for (const PathNode& n : exact) exact_ids.insert(n.birth);
    std::vector<std::uint64_t> base_order;
    for (const PathNode& n : binned) {
        CHECK(exact_ids.count(n.birth) == 1);
        base_order.push_back(n.birth);
    }
    for (int s = 0; s < 3; ++s) {
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<PathNode> again = pareto_prune(pool, rhea(), kSys, par, true);
        std::vector<std::uint64_t> order;
        for (const PathNode& n : again) order.push_back(n.birth);
        CHECK(order == base_order);
    }
}

TEST_CASE("two-objective filter keeps a strictly improving staircase") {
    std::vector<CompletedTour> tours;
    auto add = [&](double tof, double dv) {
        CompletedTour t;
        t.node_id = static_cast<std::int32_t>(tours.size());
        t.tof_days = tof;
        t.dv_mps = dv;
        tours.push_back(t);
    };
    add(700.0, 700.0);
    add(650.0, 800.0);
    add(650.0, 800.0);  // duplicate
    add(800.0, 600.0);
    add(900.0, 650.0);  // dominated
    add(600.0, 900.0);
    const std::vector<CompletedTour> front = pareto_prune_2d(tours);
    REQUIRE(front.size() == 4);
    for (size_t i = 1; i < front.size(); ++i) {
        CHECK(front[i].tof_days > front[i - 1].tof_days);
        CHECK(front[i].dv_mps < front[i - 1].dv_mps);
    }
    CHECK(front[1].node_id == 1);  // earliest copy of the duplicate pair
}

TEST_CASE("branching at the same excess speed rides the family for free") {
    const MoonTable& table = truncated_rhea_table();
    const ResonanceFamily fam{6, 7, +1, +1};
    const double alpha0 = table_alpha(table, fam, 910.0);

    NodePool pool;
    pool.push_back(make_node(1, 910.0, alpha0, +1));
    SearchParams par;
    const std::vector<PathNode> kids =
        branch(pool, 0, table, {910.0}, rhea(), kSys, par);

    const PathNode* same = nullptr;
    for (const PathNode& k : kids) {
        CHECK(k.vinf_mps == 910.0);
        CHECK(k.parent == 0);
        CHECK(k.flybys == 1);
        if (k.leg.family.M == 6) same = &k;
        if (k.leg.family.p != k.leg.family.q) {
            CHECK(k.leg.family.p == +1);  // entry side gates the other variant
            CHECK(k.entry_sign == -1);
        }
    }
    REQUIRE(same != nullptr);
    auto rec = interpolate(table, fam, 910.0);
    REQUIRE(rec.ok());
    CHECK(std::abs(same->dv_mps) < 1e-9);
    CHECK(same->tof_days == doctest::Approx(rec->tof_days).epsilon(1e-12));
    CHECK(same->alpha_deg == doctest::Approx(rec->alpha_deg).epsilon(1e-9));
    CHECK(same->entry_sign == +1);

    // an unreachable arrival angle yields no children at all
    NodePool far;
    far.push_back(make_node(1, 910.0, 5.0, +1));
    CHECK(branch(far, 0, table, {910.0}, rhea(), kSys, par).empty());

    // the flyby cap silences a node
    pool[0].flybys = par.max_flybys_per_moon;
    CHECK(branch(pool, 0, table, {910.0}, rhea(), kSys, par).empty());
}

TEST_CASE("branching from the start state walks the resonance ladder") {
    const MoonTable& table = titan_table();
    NodePool pool;
    pool.push_back(make_node(0, 1460.0, 50.0, +1));
    SearchParams par;
    const std::vector<double> targets = branch_targets(par.windows[0], 30.0);
    const std::vector<PathNode> kids = branch(pool, 0, table, targets, titan(), kSys, par);
    REQUIRE(!kids.empty());

    const double bend = max_bend_angle(titan(), 1460.0);
    bool saw_two_one = false;
    for (const PathNode& k : kids) {
        CHECK(std::find(targets.begin(), targets.end(), k.vinf_mps) != targets.end());
        CHECK(std::abs(std::abs(k.leg.alpha_dep_deg) - 50.0) <= bend + 1e-12);
        CHECK(k.leg.tof_days > 0.0);
        CHECK(k.tof_days == k.leg.tof_days);
        CHECK(std::abs(k.leg.dv_mps) <= par.dv_cap_mps + 1e-9);
        CHECK(k.dv_mps == std::abs(k.leg.dv_mps));
        if (k.leg.family.M == 2 && k.leg.family.N == 1) saw_two_one = true;
        if (k.leg.family.p != k.leg.family.q) CHECK(k.leg.family.p == +1);
    }
    CHECK(saw_two_one);
}

TEST_CASE("staged search equals exhaustive enumeration on a small instance") {
    const MoonTable& table = truncated_rhea_table();
    SearchParams par;
    par.max_flybys_per_moon = 4;
    par.bins_enabled = false;
    par.tof_cap_days = 365.0;
    par.windows[1] = kTruncRheaWindow;  // the staged run must walk the same grid
    const std::vector<double> targets = branch_targets(kTruncRheaWindow, 30.0);

    // 110 deg reaches both the interior family (~124) and one 1:1 (~102);
    // the other 1:1 only opens after a direction-changing transfer.
    PathNode root = make_node(1, 910.0, 110.0, +1);

    // every reachable state, no pruning at all
    std::vector<std::tuple<double, double, double, double, int>> all;
    {
        NodePool pool{root};
        for (size_t head = 0; head < pool.size(); ++head) {
            all.emplace_back(pool[head].tof_days, pool[head].dv_mps, -pool[head].alpha_deg,
                             pool[head].vinf_mps, pool[head].entry_sign);
            for (PathNode& k :
                 branch(pool, static_cast<std::int32_t>(head), table, targets, rhea(), kSys, par))
                pool.push_back(std::move(k));
        }
        CHECK(pool.size() > 100);  // the instance is not degenerate
    }

    // the staged archive search over the same instance
    std::vector<std::tuple<double, double, double, double, int>> staged;
    {
        NodePool pool{root};
        auto res = run_moon_tour(pool, {0}, 1, 2, table, kSys, par, {});
        REQUIRE(res.ok());
        for (const PathNode& n : pool)
            if (n.moon_idx == 1)
                staged.emplace_back(n.tof_days, n.dv_mps, -n.alpha_deg, n.vinf_mps,
                                    n.entry_sign);
    }

    auto front_of = [](std::vector<std::tuple<double, double, double, double, int>> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        std::vector<std::tuple<double, double, double, double, int>> out;
        for (const auto& a : v) {
            bool drop = false;
            for (const auto& b : v) {
                if (std::get<4>(b) != std::get<4>(a)) continue;
                const ObjectiveVector ob{std::get<0>(b), std::get<1>(b), std::get<2>(b),
                                         std::get<3>(b)};
                const ObjectiveVector oa{std::get<0>(a), std::get<1>(a), std::get<2>(a),
                                         std::get<3>(a)};
                if (dominates(ob, oa)) {
                    drop = true;
                    break;
                }
            }
            if (!drop) out.push_back(a);
        }
        return out;
    };

    const auto exhaustive_front = front_of(all);
    const auto staged_front = front_of(staged);
    REQUIRE(!exhaustive_front.empty());
    CHECK(exhaustive_front == staged_front);
}

TEST_CASE("worker count changes nothing in the search output") {
    const MoonTable& table = truncated_rhea_table();
    SearchParams par;
    par.max_flybys_per_moon = 6;
    par.tof_cap_days = 365.0;
    par.windows[1] = kTruncRheaWindow;

    NodePool pools[2];
    for (int w = 0; w < 2; ++w) {
        par.workers = w == 0 ? 1 : 4;
        NodePool pool;
        pool.push_back(make_node(1, 910.0, 110.0, +1));
        auto res = run_moon_tour(pool, {0}, 1, 2, table, kSys, par, {});
        REQUIRE(res.ok());
        pools[w] = std::move(pool);
    }
    REQUIRE(pools[0].size() == pools[1].size());
    for (size_t i = 0; i < pools[0].size(); ++i) {
        const PathNode &a = pools[0][i], &b = pools[1][i];
        CHECK(a.vinf_mps == b.vinf_mps);
        CHECK(a.alpha_deg == b.alpha_deg);
        CHECK(a.tof_days == b.tof_days);
        CHECK(a.dv_mps == b.dv_mps);
        CHECK(a.parent == b.parent);
        CHECK(a.birth == b.birth);
        CHECK(a.entry_sign == b.entry_sign);
        CHECK(a.leg.family.M == b.leg.family.M);
        CHECK(a.leg.dv_mps == b.leg.dv_mps);
    }
}

TEST_CASE("start-moon phase reaches the next orbit within two flybys") {
    const MoonTable& table = titan_table();
    SearchParams par;
    par.tof_cap_days = 200.0;
    par.max_flybys_per_moon = 3;

    NodePool pool;
    pool.push_back(make_node(0, 1460.0, 50.0, +1));
    std::vector<StageDiag> diags;
    auto res = run_moon_tour(pool, {0}, 0, 1, table, kSys, par,
                             [&](const StageDiag& d) { diags.push_back(d); });
    REQUIRE(res.ok());
    REQUIRE(!res->harvested.empty());
    CHECK(res->completed.empty());
    CHECK(!diags.empty());
    CHECK(diags.front().archive_size == 1);

    int fewest_legs = 1 << 20;
    for (std::int32_t id : res->harvested) {
        const PathNode& h = pool[static_cast<size_t>(id)];
        CHECK(h.moon_idx == 1);
        CHECK(h.link == NodeLink::Handoff);
        CHECK(h.entry_sign == -1);
        CHECK(h.vinf_mps >= par.windows[1].vmin_mps);
        CHECK(h.vinf_mps <= par.windows[1].vmax_mps);
        CHECK(h.alpha_deg > 0.0);
        CHECK(h.alpha_deg < 180.0);
        const PathNode& parent = pool[static_cast<size_t>(h.parent)];
        CHECK(h.tof_days == parent.tof_days);
        CHECK(h.dv_mps == parent.dv_mps);
        int legs = 0;
        for (std::int32_t p = h.parent; p >= 0; p = pool[static_cast<size_t>(p)].parent)
            if (pool[static_cast<size_t>(p)].link == NodeLink::Leg) ++legs;
        fewest_legs = std::min(fewest_legs, legs);
    }
    CHECK(fewest_legs <= 2);
}

namespace {

// Walk a reconstructed table checking the invariants every tour must keep:
// section-local flyby numbering, sign chaining, altitude floors.
// Returns the number of named exit rows (inter-moon handoffs).
int check_tour_record(const TourRecord& rec, const SearchParams& par,
                      const CompletedTour& t) {
    REQUIRE(!rec.rows.empty());
    CHECK(rec.rows.back().type == "EOI");
    CHECK(rec.rows.back().alt_km == par.eoi_altitude_km);
    CHECK(rec.rows.back().dv_mps == t.eoi_dv_mps);
    CHECK(rec.total_tof_days == t.tof_days);
    CHECK(rec.total_dv_mps == t.dv_mps);
    CHECK(rec.terminal_vinf_mps == t.terminal_vinf_mps);

    int handoffs = 0;
    char prev_q = 0;
    for (const FlybyRow& row : rec.rows) {
        if (row.type == "EOI") break;
        if (row.type.find(':') == std::string::npos) {
            ++handoffs;
            const MoonParams& m = kSys.moon(row.moon_idx);
            CHECK(row.alt_km == m.min_flyby_alt_km);
            CHECK_FALSE(row.has_dv);
            prev_q = 0;
            continue;
        }
        REQUIRE(row.type.size() >= 8);
        const char p = row.type[row.type.size() - 4];
        const char q = row.type[row.type.size() - 2];
        if (row.flyby_index == 1) CHECK(p == '+');
        if (prev_q != 0) CHECK(p == prev_q);  // sides must chain
        prev_q = q;
        const MoonParams& m = kSys.moon(row.moon_idx);
        CHECK(row.alt_km >= m.min_flyby_alt_km - 1e-6);
        CHECK(row.vinf_mps > 0.0);
        CHECK(row.has_dv);
        CHECK(row.dv_mps <= par.dv_cap_mps + 1e-9);
    }
    double moon_sum = 0.0;
    for (size_t m = 0; m < kMoonCount; ++m) moon_sum += rec.moon_tof_days[m];
    CHECK(moon_sum == doctest::Approx(rec.total_tof_days).epsilon(1e-9));
    return handoffs;
}

void check_completed_front(const TourRunResult& r, const SearchParams& par) {
    REQUIRE(!r.completed.empty());
    CHECK(r.completed_total >= r.completed.size());
    for (size_t i = 0; i < r.completed.size(); ++i) {
        const CompletedTour& t = r.completed[i];
        CHECK(t.terminal_vinf_mps < par.eoi_trigger_vinf_mps);
        CHECK(t.eoi_dv_mps ==
              doctest::Approx(eoi_delta_v(t.terminal_vinf_mps, enceladus(),
                                          par.eoi_altitude_km)).epsilon(1e-12));
        if (i > 0) {
            CHECK(t.tof_days > r.completed[i - 1].tof_days);
            CHECK(t.dv_mps < r.completed[i - 1].dv_mps);
        }
    }
}

}  // namespace

TEST_CASE("single-phase run pumps down and closes with an insertion burn") {
    ViltDatabase db;
    db.moons.resize(kMoonCount);
    db.moons[4] = small_enceladus_table();

    SearchParams par;
    par.start_moon_idx = 4;
    par.start_vinf_mps = 810.0;
    par.start_alpha_deg = table_alpha(db.moons[4], {7, 6, +1, +1}, 810.0);
    par.tof_cap_days = 365.0;
    par.dp_grid_step_mps = 60.0;
    par.eoi_trigger_vinf_mps = 460.0;
    par.max_flybys_per_moon = 20;
    par.windows[4] = kSmallEnceladusWindow;
    par.workers = 2;

    auto res = run_full_tour(db, kSys, par, {});
    REQUIRE(res.ok());
    check_completed_front(*res, par);
    CHECK(res->fronts.empty());  // no inter-moon handoff in a one-moon chain

    SUBCASE("reconstruction yields a consistent flyby table") {
        for (const CompletedTour& t : res->completed) {
            auto rec = reconstruct_tour(res->pool, t, kSys, par);
            REQUIRE(rec.ok());
            CHECK(check_tour_record(*rec, par, t) == 0);
            CHECK(rec->moon_flybys[4] >= 1);
        }
    }

    SUBCASE("a resume state equal to the fresh start replays the same result") {
        PhaseState start;
        start.pool.push_back(make_node(4, par.start_vinf_mps, par.start_alpha_deg, +1));
        start.archive.push_back(0);
        start.moon_idx = 4;
        auto resumed = run_full_tour(db, kSys, par, {}, {}, &start);
        REQUIRE(resumed.ok());
        REQUIRE(resumed->completed.size() == res->completed.size());
        for (size_t i = 0; i < resumed->completed.size(); ++i) {
            CHECK(resumed->completed[i].tof_days == res->completed[i].tof_days);
            CHECK(resumed->completed[i].dv_mps == res->completed[i].dv_mps);
        }
    }

    SUBCASE("checkpoints round-trip byte for byte") {
        const std::string p1 = "pathfinder_checkpoint_a.csv";
        const std::string p2 = "pathfinder_checkpoint_b.csv";
        // archive: pretend the closures' terminal nodes are still open
        std::vector<std::int32_t> archive;
        for (const CompletedTour& t : res->completed) archive.push_back(t.node_id);
        REQUIRE(write_checkpoint_csv(p1, res->pool, archive, res->completed).ok());
        auto cp = read_checkpoint_csv(p1);
        REQUIRE(cp.ok());
        CHECK(cp->archive.size() == archive.size());
        CHECK(cp->completed.size() == res->completed.size());
        REQUIRE(write_checkpoint_csv(p2, cp->pool, cp->archive, cp->completed).ok());
        std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
        std::stringstream s1, s2;
        s1 << f1.rdbuf();
        s2 << f2.rdbuf();
        CHECK(s1.str() == s2.str());
        CHECK(s1.str().size() > 100);
        std::filesystem::remove(p1);
        std::filesystem::remove(p2);
    }
}

TEST_CASE("two-phase run hands off mid-chain and resumes identically") {
    ViltDatabase db;
    db.moons.resize(kMoonCount);
    db.moons[3] = small_tethys_table();
    db.moons[4] = small_enceladus_table();

    SearchParams par;
    par.start_moon_idx = 3;
    par.start_vinf_mps = 700.0;
    // one rung below the top of the pump ladder: the exit only opens after at
    // least one flyby, so every finished tour visits both moons
    par.start_alpha_deg = table_alpha(db.moons[3], {9, 10, +1, +1}, 700.0);
    par.tof_cap_days = 300.0;
    par.dp_grid_step_mps = 50.0;
    par.max_flybys_per_moon = 14;
    par.windows[3] = kSmallTethysWindow;
    par.windows[4] = kSmallEnceladusWindow;
    par.workers = 2;

    PhaseState boundary;
    int boundaries = 0;
    auto res = run_full_tour(db, kSys, par, {}, [&](const PhaseState& st) {
        boundary = st;
        ++boundaries;
    });
    REQUIRE(res.ok());
    CHECK(boundaries == 1);
    CHECK(boundary.moon_idx == 4);
    REQUIRE(!boundary.archive.empty());
    check_completed_front(*res, par);
    REQUIRE(res->fronts.size() == 1);
    CHECK(res->fronts[0].moon_idx == 4);
    CHECK(res->fronts[0].node_ids == boundary.archive);
    for (std::int32_t id : res->fronts[0].node_ids) {
        const PathNode& n = res->pool[static_cast<size_t>(id)];
        CHECK(n.link == NodeLink::Handoff);
        CHECK(n.moon_idx == 4);
        CHECK(n.entry_sign == -1);
        CHECK(n.vinf_mps >= kSmallEnceladusWindow.vmin_mps);
        CHECK(n.vinf_mps <= kSmallEnceladusWindow.vmax_mps);
    }

    SUBCASE("tours span both moons and cross one named handoff") {
        bool saw_two_moon_tour = false;
        for (const CompletedTour& t : res->completed) {
            auto rec = reconstruct_tour(res->pool, t, kSys, par);
            REQUIRE(rec.ok());
            CHECK(check_tour_record(*rec, par, t) == 1);
            if (rec->moon_flybys[3] > 0 && rec->moon_flybys[4] > 0) saw_two_moon_tour = true;
        }
        CHECK(saw_two_moon_tour);
    }

    SUBCASE("resume from the boundary, in memory and from disk") {
        auto resumed = run_full_tour(db, kSys, par, {}, {}, &boundary);
        REQUIRE(resumed.ok());
        REQUIRE(resumed->completed.size() == res->completed.size());
        for (size_t i = 0; i < resumed->completed.size(); ++i) {
            CHECK(resumed->completed[i].tof_days == res->completed[i].tof_days);
            CHECK(resumed->completed[i].dv_mps == res->completed[i].dv_mps);
            CHECK(resumed->completed[i].eoi_dv_mps == res->completed[i].eoi_dv_mps);
            CHECK(resumed->completed[i].terminal_vinf_mps ==
                  res->completed[i].terminal_vinf_mps);
        }

        const std::string path = "pathfinder_resume_checkpoint.csv";
        REQUIRE(write_checkpoint_csv(path, boundary.pool, boundary.archive, {}).ok());
        auto cp = read_checkpoint_csv(path);
        REQUIRE(cp.ok());
        REQUIRE(cp->archive.size() == boundary.archive.size());
        PhaseState from_disk{cp->pool, cp->archive, 4};
        auto resumed2 = run_full_tour(db, kSys, par, {}, {}, &from_disk);
        REQUIRE(resumed2.ok());
        REQUIRE(resumed2->completed.size() == res->completed.size());
        for (size_t i = 0; i < resumed2->completed.size(); ++i) {
            CHECK(resumed2->completed[i].tof_days == res->completed[i].tof_days);
            CHECK(resumed2->completed[i].dv_mps == res->completed[i].dv_mps);
        }
        // reconstruction works on the compacted pool as well
        auto rec = reconstruct_tour(resumed2->pool, resumed2->completed.front(), kSys, par);
        CHECK(rec.ok());
        std::filesystem::remove(path);
    }
}

TEST_CASE("reconstruction rejects broken chains") {
    SearchParams par;
    NodePool pool;
    pool.push_back(make_node(4, 400.0, 20.0, +1));
    CompletedTour t;
    t.node_id = 5;  // out of range
    auto bad = reconstruct_tour(pool, t, kSys, par);
    CHECK(bad.error() == ErrorCode::InconsistentChain);

    pool[0].link = NodeLink::Leg;  // a chain must start at a root
    t.node_id = 0;
    auto bad2 = reconstruct_tour(pool, t, kSys, par);
    CHECK(bad2.error() == ErrorCode::InconsistentChain);
}

TEST_CASE("checkpoint reader rejects malformed input") {
    CHECK(read_checkpoint_csv("no_such_dir/nope.csv").error() == ErrorCode::IoError);

    const std::string path = "pathfinder_bad_checkpoint.csv";
    {
        std::ofstream f(path);
        f << "totally,wrong,header\n";
    }
    CHECK(read_checkpoint_csv(path).error() == ErrorCode::ParseError);
    std::filesystem::remove(path);
}
