#include "pumpdown/pathfinder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "pumpdown/csv.hpp"
#include "pumpdown/threadpool.hpp"

namespace pumpdown {

namespace {

std::tuple<double, double, double, double> as_tuple(const ObjectiveVector& v) {
    return {v.tof_days, v.dv_mps, v.neg_alpha_deg, v.vinf_mps};
}

bool mixed_direction(const ResonanceFamily& fam) { return fam.p != fam.q; }

}  // namespace

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.tof_days > b.tof_days || a.dv_mps > b.dv_mps ||
        a.neg_alpha_deg > b.neg_alpha_deg || a.vinf_mps > b.vinf_mps)
        return false;
    return a.tof_days < b.tof_days || a.dv_mps < b.dv_mps ||
           a.neg_alpha_deg < b.neg_alpha_deg || a.vinf_mps < b.vinf_mps;
}

bool lex_less(const ObjectiveVector& a, const ObjectiveVector& b) {
    return as_tuple(a) < as_tuple(b);
}

ObjectiveVector objective(const PathNode& node) {
    return {node.tof_days, node.dv_mps, -node.alpha_deg, node.vinf_mps};
}

void admissible_alpha_window(double alpha_arr_deg, double max_bend_deg, double& lo_deg,
                             double& hi_deg) {
    lo_deg = std::max(0.0, alpha_arr_deg - max_bend_deg);
    hi_deg = std::min(180.0, alpha_arr_deg + max_bend_deg);
}

std::vector<double> branch_targets(const VinfWindow& window, double step_mps) {
    std::vector<double> out;
    for (int k = 0;; ++k) {
        const double v = window.vmin_mps + k * step_mps;
        if (v > window.vmax_mps + 1e-9) break;
        out.push_back(v);
    }
    if (out.empty() || out.back() < window.vmax_mps - 1e-9) out.push_back(window.vmax_mps);
    return out;
}

std::vector<PathNode> branch(const NodePool& pool, std::int32_t node_id,
                             const MoonTable& table, const std::vector<double>& targets_mps,
                             const MoonParams& moon, const SystemModel& sys,
                             const SearchParams& par) {
    std::vector<PathNode> out;
    const PathNode& n = pool[static_cast<size_t>(node_id)];
    if (par.max_flybys_per_moon > 0 && n.flybys >= par.max_flybys_per_moon) return out;

    const double dmax = max_bend_angle(moon, n.vinf_mps);
    double alo = 0.0, ahi = 0.0;
    admissible_alpha_window(n.alpha_deg, dmax, alo, ahi);

    for (const MoonTable::FamilyRows& fr : table.families) {
        const ResonanceFamily& fam = fr.family;
        if (mixed_direction(fam) && fam.p != n.entry_sign) continue;
        for (double u : targets_mps) {
            const double vbar = 0.5 * (n.vinf_mps + u);
            auto rec = interpolate(table, fam, vbar);
            if (!rec.ok()) continue;
            auto est = leg_from_departure(moon, sys, *rec, n.vinf_mps, par.dv_cap_mps);
            if (!est.ok()) continue;
            const double adep = std::abs(est->alpha_dep_deg);
            if (adep < alo - 1e-12 || adep > ahi + 1e-12) continue;
            if (est->tof_days <= 0.0) continue;
            const double tof = n.tof_days + est->tof_days;
            if (tof > par.tof_cap_days) continue;

            PathNode c;
            c.moon_idx = n.moon_idx;
            c.vinf_mps = u;  // splits are symmetric around the record, so the
                             // arrival lands on the target by construction
            c.alpha_deg = std::abs(est->alpha_arr_deg);
            c.tof_days = tof;
            c.dv_mps = n.dv_mps + std::abs(est->dv_mps);
            c.flybys = n.flybys + 1;
            c.entry_sign = mixed_direction(fam) ? static_cast<std::int8_t>(fam.q) : n.entry_sign;
            c.link = NodeLink::Leg;
            c.parent = node_id;
            c.leg = {fam,
                     est->dv_mps,
                     est->tof_days,
                     est->alpha_dep_deg,
                     est->alpha_arr_deg,
                     est->vinf_dep_mps,
                     est->vinf_arr_mps};
            out.push_back(c);
        }
    }
    return out;
}

namespace {

struct BinKey {
    std::int64_t tof = 0, dv = 0, alpha = 0, vinf = 0;
    bool operator<(const BinKey& o) const {
        return std::tie(tof, dv, alpha, vinf) < std::tie(o.tof, o.dv, o.alpha, o.vinf);
    }
};

bool vector_equal(const ObjectiveVector& a, const ObjectiveVector& b) {
    return as_tuple(a) == as_tuple(b);
}

// Exactly non-dominated subset of a canonically sorted, deduplicated list.
std::vector<PathNode> nondominated_sweep(std::vector<PathNode>&& sorted) {
    std::vector<PathNode> kept;
    std::vector<ObjectiveVector> kv;
    double min_dv = std::numeric_limits<double>::infinity();
    double min_na = min_dv, min_vf = min_dv;
    kept.reserve(sorted.size() / 4 + 8);
    for (PathNode& c : sorted) {
        const ObjectiveVector v = objective(c);
        bool dominated = false;
        // Only a lexicographically earlier point can dominate; a point
        // undercutting every kept value in some component cannot be covered.
        if (v.dv_mps >= min_dv && v.neg_alpha_deg >= min_na && v.vinf_mps >= min_vf) {
            for (const ObjectiveVector& k : kv) {
                if (dominates(k, v)) {
                    dominated = true;
                    break;
                }
            }
        }
        if (dominated) continue;
        min_dv = std::min(min_dv, v.dv_mps);
        min_na = std::min(min_na, v.neg_alpha_deg);
        min_vf = std::min(min_vf, v.vinf_mps);
        kv.push_back(v);
        kept.push_back(std::move(c));
    }
    return kept;
}

std::vector<PathNode> prune_class(std::vector<PathNode>&& cands, const MoonParams& moon,
                                  const SearchParams& par, bool bins_enabled) {
    std::sort(cands.begin(), cands.end(), [](const PathNode& a, const PathNode& b) {
        const auto ta = as_tuple(objective(a)), tb = as_tuple(objective(b));
        if (ta != tb) return ta < tb;
        return a.birth < b.birth;
    });
    // Same objectives within a stage mean the same onward search state;
    // keep the earliest-born representative.
    cands.erase(std::unique(cands.begin(), cands.end(),
                            [](const PathNode& a, const PathNode& b) {
                                return vector_equal(objective(a), objective(b));
                            }),
                cands.end());
    std::vector<PathNode> front = nondominated_sweep(std::move(cands));
    if (!bins_enabled) return front;

    std::map<BinKey, size_t> best;  // bin -> index into front
    std::vector<char> keep(front.size(), 0);
    for (size_t i = 0; i < front.size(); ++i) {
        const PathNode& n = front[i];
        const double dalpha =
            std::max(1e-9, max_bend_angle(moon, n.vinf_mps) / par.bin_alpha_divisor);
        BinKey key{static_cast<std::int64_t>(std::floor(n.tof_days / par.bin_tof_days)),
                   static_cast<std::int64_t>(std::floor(n.dv_mps / par.bin_dv_mps)),
                   static_cast<std::int64_t>(std::floor(n.alpha_deg / dalpha)),
                   static_cast<std::int64_t>(std::floor(n.vinf_mps / par.bin_vinf_mps))};
        auto [it, inserted] = best.emplace(key, i);
        if (!inserted) {
            // front is lex+birth sorted, so the first occupant already wins
            (void)it;
            continue;
        }
        keep[i] = 1;
    }
    std::vector<PathNode> out;
    out.reserve(best.size());
    for (size_t i = 0; i < front.size(); ++i)
        if (keep[i]) out.push_back(std::move(front[i]));
    return out;
}

}  // namespace

std::vector<PathNode> pareto_prune(std::vector<PathNode> candidates, const MoonParams& moon,
                                   const SystemModel& sys, const SearchParams& par,
                                   bool bins_enabled) {
    (void)sys;
    std::vector<PathNode> minus, plus;
    minus.reserve(candidates.size());
    plus.reserve(candidates.size());
    for (PathNode& c : candidates)
        (c.entry_sign < 0 ? minus : plus).push_back(std::move(c));
    std::vector<PathNode> out = prune_class(std::move(minus), moon, par, bins_enabled);
    std::vector<PathNode> pos = prune_class(std::move(plus), moon, par, bins_enabled);
    out.insert(out.end(), std::make_move_iterator(pos.begin()),
               std::make_move_iterator(pos.end()));
    return out;
}

std::vector<PathNode> pareto_prune_states(std::vector<PathNode> candidates,
                                          const MoonParams& moon, const SystemModel& sys,
                                          const SearchParams& par, bool bins_enabled) {
    (void)sys;
    // Labels live on grid states: two labels compete only when they share the
    // entry side and the (exactly snapped) excess speed, because those fix the
    // set of onward transfers. Comparing across states can discard a label
    // whose descendants are unmatched anywhere else.
    std::map<std::pair<int, double>, std::vector<PathNode>> states;
    for (PathNode& c : candidates)
        states[{c.entry_sign < 0 ? -1 : +1, c.vinf_mps}].push_back(std::move(c));
    std::vector<PathNode> out;
    for (auto& [key, group] : states) {
        std::vector<PathNode> kept = prune_class(std::move(group), moon, par, bins_enabled);
        out.insert(out.end(), std::make_move_iterator(kept.begin()),
                   std::make_move_iterator(kept.end()));
    }
    return out;
}

std::optional<ExitState> exit_feasible(const PathNode& node, const MoonParams& moon1,
                                       const MoonParams& moon2, const VinfWindow& window2,
                                       const SystemModel& sys) {
    if (node.vinf_mps <= 0.0) return std::nullopt;
    const double gm = sys.gm_saturn;
    const double vm1 = circular_velocity(moon1, sys);
    const double vm2 = circular_velocity(moon2, sys);
    const double v = node.vinf_mps / 1000.0;
    const double dmax = max_bend_angle(moon1, node.vinf_mps);
    const double alpha_dep = std::min(180.0, node.alpha_deg + dmax);
    const double ca = std::cos(alpha_dep * kRadPerDeg);

    const double vsc_sq = vm1 * vm1 + v * v + 2.0 * vm1 * v * ca;
    const double h = moon1.a_km * (vm1 + v * ca);
    const double energy = 0.5 * vsc_sq - gm / moon1.a_km;
    const double ecc = std::sqrt(std::max(0.0, 1.0 + 2.0 * energy * h * h / (gm * gm)));
    const double rp = h * h / gm / (1.0 + ecc);
    if (rp > moon2.a_km) return std::nullopt;

    const double v2_sq = 2.0 * (energy + gm / moon2.a_km);
    if (v2_sq <= 0.0) return std::nullopt;
    const double vt2 = h / moon2.a_km;
    const double vr2 = -std::sqrt(std::max(0.0, v2_sq - vt2 * vt2));
    const double vinf2 = std::hypot(vt2 - vm2, vr2);
    const double vinf2_mps = vinf2 * 1000.0;
    if (vinf2_mps < window2.vmin_mps - 1e-9 || vinf2_mps > window2.vmax_mps + 1e-9)
        return std::nullopt;
    if (vinf2 <= 0.0) return std::nullopt;

    ExitState es;
    es.alpha_dep_deg = alpha_dep;
    es.a_sc_km = energy < 0.0 ? -gm / (2.0 * energy) : std::numeric_limits<double>::infinity();
    es.e_sc = ecc;
    es.rp_sc_km = rp;
    es.vinf_arr_mps = vinf2_mps;
    const double ca2 = std::clamp((vt2 - vm2) / vinf2, -1.0, 1.0);
    es.alpha_arr_deg = std::acos(ca2) * kDegPerRad;
    return es;
}

double eoi_delta_v(double vinf_mps, const MoonParams& moon, double altitude_km) {
    return orbit_insertion_dv(vinf_mps, moon, altitude_km);
}

std::vector<CompletedTour> pareto_prune_2d(std::vector<CompletedTour> tours) {
    std::sort(tours.begin(), tours.end(), [](const CompletedTour& a, const CompletedTour& b) {
        return std::tie(a.tof_days, a.dv_mps, a.node_id) <
               std::tie(b.tof_days, b.dv_mps, b.node_id);
    });
    std::vector<CompletedTour> out;
    double best_dv = std::numeric_limits<double>::infinity();
    for (CompletedTour& t : tours) {
        if (t.dv_mps >= best_dv) continue;  // dominated or duplicate
        best_dv = t.dv_mps;
        out.push_back(std::move(t));
    }
    return out;
}

Result<MoonPhaseResult> run_moon_tour(NodePool& pool, const std::vector<std::int32_t>& initial,
                                      int moon_idx, int next_moon_idx, const MoonTable& table,
                                      const SystemModel& sys, const SearchParams& par,
                                      const DiagSink& diag) {
    MoonPhaseResult res;
    const MoonParams& moon = sys.moon(moon_idx);
    const std::vector<double> targets = branch_targets(par.windows[moon_idx],
                                                       par.dp_grid_step_mps);
    std::vector<std::int32_t> archive = initial;

    for (int stage = 0; !archive.empty(); ++stage) {
        std::size_t harvested = 0;
        for (std::int32_t id : archive) {
            const PathNode& n = pool[static_cast<size_t>(id)];
            if (next_moon_idx < 0) {
                if (n.vinf_mps < par.eoi_trigger_vinf_mps) {
                    const double burn = eoi_delta_v(n.vinf_mps, moon, par.eoi_altitude_km);
                    res.completed.push_back(
                        {id, n.tof_days, n.dv_mps + burn, burn, n.vinf_mps});
                    ++harvested;
                }
            } else {
                auto es = exit_feasible(n, moon, sys.moon(next_moon_idx),
                                        par.windows[next_moon_idx], sys);
                if (es) {
                    PathNode hn;
                    hn.moon_idx = next_moon_idx;
                    hn.vinf_mps = es->vinf_arr_mps;
                    hn.alpha_deg = es->alpha_arr_deg;
                    hn.tof_days = n.tof_days;  // inter-moon phasing time ignored
                    hn.dv_mps = n.dv_mps;
                    hn.flybys = 0;
                    hn.entry_sign = -1;  // first crossing of the inner orbit is inbound
                    hn.link = NodeLink::Handoff;
                    hn.parent = id;
                    hn.birth = static_cast<std::uint64_t>(pool.size());
                    pool.push_back(hn);
                    res.harvested.push_back(static_cast<std::int32_t>(pool.size()) - 1);
                    ++harvested;
                }
            }
        }
        if (diag) diag({moon_idx, stage, archive.size(), harvested});

        std::vector<std::vector<PathNode>> buckets(archive.size());
        const NodePool& cpool = pool;
        parallel_for(archive.size(), par.workers, [&](std::size_t i) {
            buckets[i] = branch(cpool, archive[i], table, targets, moon, sys, par);
        });
        std::size_t total = 0;
        for (const auto& b : buckets) total += b.size();
        std::vector<PathNode> cands;
        cands.reserve(total);
        for (std::size_t i = 0; i < buckets.size(); ++i) {
            std::uint64_t k = 0;
            for (PathNode& c : buckets[i]) {
                c.birth = (static_cast<std::uint64_t>(i) << 32) | k++;
                cands.push_back(std::move(c));
            }
        }
        if (cands.empty()) break;
        std::vector<PathNode> pruned =
            pareto_prune_states(std::move(cands), moon, sys, par, par.bins_enabled);
        archive.clear();
        archive.reserve(pruned.size());
        for (PathNode& c : pruned) {
            pool.push_back(std::move(c));
            archive.push_back(static_cast<std::int32_t>(pool.size()) - 1);
        }
    }

    if (res.harvested.empty() && res.completed.empty())
        return Result<MoonPhaseResult>(
            ErrorCode::EmptyFront,
            "no path leaves the " + moon.name + " phase");
    return Result<MoonPhaseResult>(std::move(res));
}

Result<TourRunResult> run_full_tour(const ViltDatabase& db, const SystemModel& sys,
                                    const SearchParams& par, const DiagSink& diag,
                                    const PhaseSink& after_phase, const PhaseState* resume) {
    TourRunResult out;
    std::vector<std::int32_t> archive;
    int first_moon = par.start_moon_idx;
    if (resume) {
        if (resume->archive.empty())
            return Result<TourRunResult>(ErrorCode::ValidationError, "resume state has no archive");
        out.pool = resume->pool;
        archive = resume->archive;
        first_moon = resume->moon_idx;
    } else {
        PathNode root;
        root.moon_idx = par.start_moon_idx;
        root.vinf_mps = par.start_vinf_mps;
        root.alpha_deg = std::abs(par.start_alpha_deg);
        root.entry_sign = par.start_alpha_deg < 0.0 ? -1 : +1;
        root.link = NodeLink::Root;
        root.parent = -1;
        root.birth = 0;
        out.pool.push_back(root);
        archive.push_back(0);
    }

    for (int m = first_moon; m < kMoonCount; ++m) {
        const int next = m + 1 < kMoonCount ? m + 1 : -1;
        if (static_cast<size_t>(m) >= db.moons.size())
            return Result<TourRunResult>(ErrorCode::ValidationError,
                                         "database does not cover " + sys.moon(m).name);
        auto phase = run_moon_tour(out.pool, archive, m, next, db.moons[static_cast<size_t>(m)],
                                   sys, par, diag);
        if (!phase.ok()) return Result<TourRunResult>(phase.error(), phase.message());
        if (next >= 0) {
            std::vector<PathNode> arrivals;
            arrivals.reserve(phase->harvested.size());
            for (std::int32_t id : phase->harvested)
                arrivals.push_back(out.pool[static_cast<size_t>(id)]);
            // handoff nodes carry their own pool index in birth
            std::vector<PathNode> kept =
                pareto_prune(std::move(arrivals), sys.moon(next), sys, par, par.bins_enabled);
            MoonFront front;
            front.moon_idx = next;
            front.node_ids.reserve(kept.size());
            for (const PathNode& k : kept)
                front.node_ids.push_back(static_cast<std::int32_t>(k.birth));
            if (front.node_ids.empty())
                return Result<TourRunResult>(ErrorCode::EmptyFront,
                                             "empty arrival front at " + sys.moon(next).name);
            archive = front.node_ids;
            out.fronts.push_back(std::move(front));
            if (after_phase) after_phase({out.pool, archive, next});
        } else {
            out.completed_total = phase->completed.size();
            out.completed = pareto_prune_2d(std::move(phase->completed));
            if (out.completed.empty())
                return Result<TourRunResult>(ErrorCode::EmptyFront, "no completed tour");
        }
    }
    return Result<TourRunResult>(std::move(out));
}

namespace {

std::string family_type_label(const ResonanceFamily& fam, int p, int q) {
    std::string s = std::to_string(fam.M) + ":" + std::to_string(fam.N) + "^(";
    s += p > 0 ? '+' : '-';
    s += ',';
    s += q > 0 ? '+' : '-';
    s += ')';
    return s;
}

double flyby_altitude_km(const MoonParams& moon, double vinf_mps, double bend_deg) {
    auto alt = altitude_for_bend(moon, vinf_mps, bend_deg);
    if (!alt.ok()) return moon.min_flyby_alt_km;  // bend at the admissible edge
    return std::min(*alt, 1e9);
}

}  // namespace

Result<TourRecord> reconstruct_tour(const NodePool& pool, const CompletedTour& tour,
                                    const SystemModel& sys, const SearchParams& par) {
    auto fail = [](const std::string& why) {
        return Result<TourRecord>(ErrorCode::InconsistentChain, why);
    };
    if (tour.node_id < 0 || static_cast<size_t>(tour.node_id) >= pool.size())
        return fail("terminal node out of range");

    std::vector<std::int32_t> chain;
    for (std::int32_t id = tour.node_id; id >= 0;) {
        if (static_cast<size_t>(id) >= pool.size() || chain.size() > pool.size())
            return fail("broken parent chain");
        chain.push_back(id);
        id = pool[static_cast<size_t>(id)].parent;
    }
    std::reverse(chain.begin(), chain.end());
    if (pool[static_cast<size_t>(chain.front())].link != NodeLink::Root)
        return fail("chain does not start at a root");

    TourRecord rec;
    rec.eoi_dv_mps = tour.eoi_dv_mps;
    rec.terminal_vinf_mps = tour.terminal_vinf_mps;
    rec.total_tof_days = tour.tof_days;
    rec.total_dv_mps = tour.dv_mps;

    // Split the chain into per-moon sections of consecutive transfer legs.
    struct Section {
        int moon_idx;
        double entry_alpha_deg;
        double entry_vinf_mps;
        std::vector<const PathNode*> legs;
        double exit_vinf_mps;
    };
    std::vector<Section> sections;
    {
        const PathNode& root = pool[static_cast<size_t>(chain.front())];
        sections.push_back({root.moon_idx, root.alpha_deg, root.vinf_mps, {}, root.vinf_mps});
    }
    for (size_t i = 1; i < chain.size(); ++i) {
        const PathNode& n = pool[static_cast<size_t>(chain[i])];
        const PathNode& prev = pool[static_cast<size_t>(chain[i - 1])];
        if (n.link == NodeLink::Leg) {
            if (n.moon_idx != prev.moon_idx) return fail("transfer leg changes moons");
            if (std::abs(n.leg.vinf_dep_mps - prev.vinf_mps) > 1e-6 * std::max(1.0, prev.vinf_mps))
                return fail("leg departure speed does not match the node before it");
            if (n.tof_days + 1e-9 < prev.tof_days || n.dv_mps + 1e-9 < prev.dv_mps)
                return fail("accumulators decreased along the chain");
            sections.back().legs.push_back(&n);
            sections.back().exit_vinf_mps = n.vinf_mps;
        } else if (n.link == NodeLink::Handoff) {
            if (n.moon_idx != prev.moon_idx + 1) return fail("handoff skips a moon");
            sections.push_back({n.moon_idx, n.alpha_deg, n.vinf_mps, {}, n.vinf_mps});
        } else {
            return fail("unexpected root in the middle of a chain");
        }
    }

    for (size_t s = 0; s < sections.size(); ++s) {
        const Section& sec = sections[s];
        const MoonParams& moon = sys.moon(sec.moon_idx);
        const bool last = s + 1 == sections.size();

        // Print-side bookkeeping: each section starts on the + side; the
        // mixed-direction 1:1 transfers carry fixed signs, every other
        // family bridges to whatever the next fixed sign requires.
        int d = +1;
        double prev_alpha = sec.entry_alpha_deg;
        for (size_t j = 0; j < sec.legs.size(); ++j) {
            const SearchLeg& leg = sec.legs[j]->leg;
            const bool mix = mixed_direction(leg.family);
            int p_print, q_print;
            if (mix) {
                p_print = leg.family.p;
                q_print = leg.family.q;
                if (j > 0 && p_print != d && mixed_direction(sec.legs[j - 1]->leg.family))
                    return fail("mixed-direction transfers meet on opposite sides");
            } else {
                p_print = d;
                const bool next_mix =
                    j + 1 < sec.legs.size() && mixed_direction(sec.legs[j + 1]->leg.family);
                q_print = next_mix ? sec.legs[j + 1]->leg.family.p : +1;
            }
            d = q_print;

            const double bend = std::abs(std::abs(leg.alpha_dep_deg) - prev_alpha);
            FlybyRow row;
            row.moon_idx = sec.moon_idx;
            row.flyby_index = static_cast<int>(j) + 1;
            row.type = family_type_label(leg.family, p_print, q_print);
            row.has_tof = row.has_dv = true;
            row.tof_days = leg.tof_days;
            row.alt_km = flyby_altitude_km(moon, leg.vinf_dep_mps, bend);
            row.vinf_mps = leg.vinf_dep_mps;
            row.dv_mps = std::abs(leg.dv_mps);
            rec.rows.push_back(std::move(row));

            rec.moon_tof_days[static_cast<size_t>(sec.moon_idx)] += leg.tof_days;
            rec.moon_dv_mps[static_cast<size_t>(sec.moon_idx)] += std::abs(leg.dv_mps);
            rec.moon_flybys[static_cast<size_t>(sec.moon_idx)] += 1;
            prev_alpha = std::abs(leg.alpha_arr_deg);
        }

        FlybyRow tail;
        tail.moon_idx = sec.moon_idx;
        tail.flyby_index = static_cast<int>(sec.legs.size()) + 1;
        tail.vinf_mps = sec.exit_vinf_mps;
        if (last) {
            tail.type = "EOI";
            tail.alt_km = par.eoi_altitude_km;
            tail.has_dv = true;
            tail.dv_mps = tour.eoi_dv_mps;
        } else {
            tail.type = sys.moon(sections[s + 1].moon_idx).name;
            tail.alt_km = moon.min_flyby_alt_km;  // exit flyby bends as hard as allowed
        }
        rec.rows.push_back(std::move(tail));
    }

    double sum_tof = 0.0, sum_dv = rec.eoi_dv_mps;
    for (size_t m = 0; m < kMoonCount; ++m) {
        sum_tof += rec.moon_tof_days[m];
        sum_dv += rec.moon_dv_mps[m];
    }
    if (std::abs(sum_tof - rec.total_tof_days) > 1e-6 * std::max(1.0, rec.total_tof_days))
        return fail("per-leg times do not add up to the stored total");
    if (std::abs(sum_dv - rec.total_dv_mps) > 1e-6 * std::max(1.0, rec.total_dv_mps))
        return fail("per-leg costs do not add up to the stored total");
    return Result<TourRecord>(std::move(rec));
}

namespace {

const char kCheckpointHeader[] =
    "kind,node_id,parent_id,link,moon,M,N,p,q,vinf_mps,alpha_deg,entry_sign,tof_days,"
    "dv_mps,flybys,leg_dv_mps,leg_tof_days,leg_alpha_dep_deg,leg_alpha_arr_deg,"
    "leg_vinf_dep_mps,leg_vinf_arr_mps,birth,archive_pos";

}  // namespace

Result<bool> write_checkpoint_csv(const std::string& path, const NodePool& pool,
                                  const std::vector<std::int32_t>& archive,
                                  const std::vector<CompletedTour>& completed) {
    // Keep only nodes reachable from the archive or a completed tour and
    // remap ids onto the compacted order (parents stay before children).
    std::vector<std::int32_t> remap(pool.size(), -1);
    std::vector<char> wanted(pool.size(), 0);
    auto mark = [&](std::int32_t id) {
        while (id >= 0 && !wanted[static_cast<size_t>(id)]) {
            wanted[static_cast<size_t>(id)] = 1;
            id = pool[static_cast<size_t>(id)].parent;
        }
    };
    for (std::int32_t id : archive) mark(id);
    for (const CompletedTour& t : completed) mark(t.node_id);

    std::ostringstream os;
    os << kCheckpointHeader << "\n";
    // Archive order drives tie-breaking downstream, so serialize the position.
    std::vector<std::int64_t> archive_pos(pool.size(), -1);
    for (size_t k = 0; k < archive.size(); ++k)
        archive_pos[static_cast<size_t>(archive[k])] = static_cast<std::int64_t>(k);
    std::int32_t next_id = 0;
    for (size_t i = 0; i < pool.size(); ++i) {
        if (!wanted[i]) continue;
        remap[i] = next_id++;
        const PathNode& n = pool[i];
        const std::int32_t parent = n.parent < 0 ? -1 : remap[static_cast<size_t>(n.parent)];
        os << "node," << remap[i] << ',' << parent << ','
           << static_cast<int>(n.link) << ',' << n.moon_idx << ',' << n.leg.family.M << ','
           << n.leg.family.N << ',' << n.leg.family.p << ',' << n.leg.family.q << ','
           << format_sig17(n.vinf_mps) << ',' << format_sig17(n.alpha_deg) << ','
           << static_cast<int>(n.entry_sign) << ',' << format_sig17(n.tof_days) << ','
           << format_sig17(n.dv_mps) << ',' << n.flybys << ','
           << format_sig17(n.leg.dv_mps) << ',' << format_sig17(n.leg.tof_days) << ','
           << format_sig17(n.leg.alpha_dep_deg) << ',' << format_sig17(n.leg.alpha_arr_deg)
           << ',' << format_sig17(n.leg.vinf_dep_mps) << ','
           << format_sig17(n.leg.vinf_arr_mps) << ',' << n.birth << ','
           << archive_pos[i] << "\n";
    }
    for (const CompletedTour& t : completed) {
        os << "completed," << remap[static_cast<size_t>(t.node_id)]
           << ",-1,0,0,0,0,0,0," << format_sig17(t.terminal_vinf_mps) << ",0,0,"
           << format_sig17(t.tof_days) << ',' << format_sig17(t.dv_mps) << ",0,"
           << format_sig17(t.eoi_dv_mps) << ",0,0,0,0,0,0,-1\n";
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) return Result<bool>(ErrorCode::IoError, "cannot open " + path);
    f << os.str();
    f.flush();
    if (!f) return Result<bool>(ErrorCode::IoError, "write failed for " + path);
    return Result<bool>(true);
}

Result<Checkpoint> read_checkpoint_csv(const std::string& path) {
    auto fail = [&](const std::string& why) {
        return Result<Checkpoint>(ErrorCode::ParseError, path + ": " + why);
    };
    std::ifstream f(path, std::ios::binary);
    if (!f) return Result<Checkpoint>(ErrorCode::IoError, "cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) return fail("empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCheckpointHeader) return fail("unexpected header");

    Checkpoint cp;
    std::vector<std::pair<std::int64_t, std::int32_t>> archived;  // (pos, id)
    size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> c = split_csv_line(line);
        if (c.size() != 23) return fail("line " + std::to_string(lineno) + ": field count");
        auto num = [&](size_t idx) { return parse_double(c[idx]); };
        auto idx = [&](size_t i2) { return parse_int(c[i2]); };
        if (c[0] == "node") {
            PathNode n;
            auto id = idx(1), parent = idx(2), link = idx(3), moonv = idx(4);
            auto mm = idx(5), nn = idx(6), pp = idx(7), qq = idx(8);
            auto sign = idx(11), fly = idx(14), birth = idx(21), arch = idx(22);
            auto vinf = num(9), alpha = num(10), tof = num(12), dv = num(13);
            auto ldv = num(15), ltof = num(16), lad = num(17), laa = num(18);
            auto lvd = num(19), lva = num(20);
            for (const auto* r : {&id, &parent, &link, &moonv, &mm, &nn, &pp, &qq, &sign,
                                  &fly, &birth, &arch})
                if (!r->ok()) return fail("line " + std::to_string(lineno) + ": bad integer");
            for (const auto* r : {&vinf, &alpha, &tof, &dv, &ldv, &ltof, &lad, &laa, &lvd, &lva})
                if (!r->ok()) return fail("line " + std::to_string(lineno) + ": bad number");
            if (*id != static_cast<long long>(cp.pool.size()))
                return fail("line " + std::to_string(lineno) + ": ids must be dense");
            if (*parent >= *id) return fail("line " + std::to_string(lineno) + ": parent order");
            n.moon_idx = static_cast<int>(*moonv);
            n.vinf_mps = *vinf;
            n.alpha_deg = *alpha;
            n.tof_days = *tof;
            n.dv_mps = *dv;
            n.flybys = static_cast<int>(*fly);
            n.entry_sign = static_cast<std::int8_t>(*sign);
            n.link = static_cast<NodeLink>(*link);
            n.parent = static_cast<std::int32_t>(*parent);
            n.leg.family = {static_cast<int>(*mm), static_cast<int>(*nn),
                            static_cast<int>(*pp), static_cast<int>(*qq)};
            n.leg.dv_mps = *ldv;
            n.leg.tof_days = *ltof;
            n.leg.alpha_dep_deg = *lad;
            n.leg.alpha_arr_deg = *laa;
            n.leg.vinf_dep_mps = *lvd;
            n.leg.vinf_arr_mps = *lva;
            n.birth = static_cast<std::uint64_t>(*birth);
            if (*arch >= 0)
                archived.emplace_back(*arch, static_cast<std::int32_t>(cp.pool.size()));
            cp.pool.push_back(n);
        } else if (c[0] == "completed") {
            CompletedTour t;
            auto id = idx(1);
            auto vinf = num(9), tof = num(12), dv = num(13), eoi = num(15);
            if (!id.ok() || !vinf.ok() || !tof.ok() || !dv.ok() || !eoi.ok())
                return fail("line " + std::to_string(lineno) + ": bad completed row");
            if (*id < 0 || *id >= static_cast<long long>(cp.pool.size()))
                return fail("line " + std::to_string(lineno) + ": completed id out of range");
            t.node_id = static_cast<std::int32_t>(*id);
            t.terminal_vinf_mps = *vinf;
            t.tof_days = *tof;
            t.dv_mps = *dv;
            t.eoi_dv_mps = *eoi;
            cp.completed.push_back(t);
        } else {
            return fail("line " + std::to_string(lineno) + ": unknown row kind");
        }
    }
    std::sort(archived.begin(), archived.end());
    for (size_t k = 0; k < archived.size(); ++k) {
        if (archived[k].first != static_cast<std::int64_t>(k))
            return fail("archive positions are not dense");
        cp.archive.push_back(archived[k].second);
    }
    return Result<Checkpoint>(std::move(cp));
}

}  // namespace pumpdown
