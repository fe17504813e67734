#include "pumpdown/vilt.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>

#include "pumpdown/csv.hpp"
#include "pumpdown/threadpool.hpp"

namespace pumpdown {

namespace {

// The solver works in circular-moon units: moon orbit radius = 1, moon
// speed = 1, GM = 1. The moon advances one radian of longitude per unit
// time; days = nd_time * period / (2 pi).

constexpr double kInnerStepLimitRad = 0.08;
constexpr double kProbeSplitMps = 5.0;  // sensitivity perturbation
// A +split probe whose impulse exceeds split * this ratio landed in a
// useless local basin (the trivial bound is ~2x the split); drop it.
constexpr double kProbeQualityRatio = 2.5;

struct EqsOut {
    double e1 = 0.0, e2 = 0.0;  // radius and time residuals at the junction
    kepler::Elements dep, arr;  // conics; .f is the encounter anomaly
    double tf = 0.0, th1 = 0.0, th2 = 0.0;
    double t1 = 0.0, t2r = 0.0;
    double rj = 0.0;  // junction radius (departure side)
};

// Junction residuals for fixed junction anomalies (phi on the departure
// conic, f2 on the arrival conic) as functions of the two pump angles.
bool junction_eqs(const ResonanceFamily& fam, double vd, double va, double phi,
                  double f2, double ad, double aa, EqsOut& out) {
    if (!(ad > 1e-9 && ad < kPi - 1e-9 && aa > 1e-9 && aa < kPi - 1e-9)) return false;
    if (!kepler::elements_from_state(1.0, 1.0, fam.p * vd * std::sin(ad),
                                     1.0 + vd * std::cos(ad), out.dep))
        return false;
    if (!kepler::elements_from_state(1.0, 1.0, fam.q * va * std::sin(aa),
                                     1.0 + va * std::cos(aa), out.arr))
        return false;
    const double fd = out.dep.f, fa = out.arr.f;
    out.th1 = phi - fd;
    out.th2 = fa - f2;
    out.tf = out.th1 + out.th2 + 2.0 * kPi * (fam.M - fam.N);
    if (out.th1 <= 0.0 || out.th2 <= 0.0 || out.tf <= 0.0) return false;
    const double r1 = kepler::radius(out.dep.a, out.dep.e, phi);
    const double r2 = kepler::radius(out.arr.a, out.arr.e, f2);
    out.t1 = kepler::unwrapped_time(1.0, out.dep.a, out.dep.e, phi) -
             kepler::unwrapped_time(1.0, out.dep.a, out.dep.e, fd);
    out.t2r = kepler::unwrapped_time(1.0, out.arr.a, out.arr.e, fa) -
              kepler::unwrapped_time(1.0, out.arr.a, out.arr.e, f2);
    if (out.t2r < 0.0) return false;
    out.rj = r1;
    out.e1 = r1 - r2;
    out.e2 = out.t1 + out.t2r - out.tf;
    return true;
}

struct InnerOut {
    double dv = 0.0;
    double ad = 0.0, aa = 0.0;
    EqsOut eq;
};

// 2x2 Newton on the pump angles: match the junction radii and close the
// total transfer time. Warm-started; rejects instead of wandering.
std::optional<InnerOut> inner_solve(const ResonanceFamily& fam, double vd, double va,
                                    double phi, double f2, double ad0, double aa0) {
    double ad = ad0, aa = aa0;
    EqsOut z;
    for (int it = 0; it < 40; ++it) {
        if (!junction_eqs(fam, vd, va, phi, f2, ad, aa, z)) return std::nullopt;
        if (std::abs(z.e1) < 1e-13 && std::abs(z.e2) < 1e-12) break;
        const double hs = 1e-8;
        EqsOut zp, zm, zq, zr;
        if (!junction_eqs(fam, vd, va, phi, f2, ad + hs, aa, zp) ||
            !junction_eqs(fam, vd, va, phi, f2, ad - hs, aa, zm) ||
            !junction_eqs(fam, vd, va, phi, f2, ad, aa + hs, zq) ||
            !junction_eqs(fam, vd, va, phi, f2, ad, aa - hs, zr))
            return std::nullopt;
        const double j11 = (zp.e1 - zm.e1) / (2.0 * hs);
        const double j12 = (zq.e1 - zr.e1) / (2.0 * hs);
        const double j21 = (zp.e2 - zm.e2) / (2.0 * hs);
        const double j22 = (zq.e2 - zr.e2) / (2.0 * hs);
        const double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-18) return std::nullopt;
        const double dxa = (z.e1 * j22 - z.e2 * j12) / det;
        const double dxb = (j11 * z.e2 - j21 * z.e1) / det;
        const double sc = std::max(
            {1.0, std::abs(dxa) / kInnerStepLimitRad, std::abs(dxb) / kInnerStepLimitRad});
        ad -= dxa / sc;
        aa -= dxb / sc;
    }
    if (!junction_eqs(fam, vd, va, phi, f2, ad, aa, z)) return std::nullopt;
    if (std::abs(z.e1) > 1e-11 || std::abs(z.e2) > 1e-10) return std::nullopt;
    double v1r, v1t, v2r, v2t;
    kepler::velocity(1.0, z.dep.e, z.dep.h, phi, v1r, v1t);
    kepler::velocity(1.0, z.arr.e, z.arr.h, f2, v2r, v2t);
    InnerOut out;
    out.dv = std::hypot(v2r - v1r, v2t - v1t);
    out.ad = ad;
    out.aa = aa;
    out.eq = z;
    return out;
}

struct NmEval {
    double cost = 1e9;
    std::optional<InnerOut> inner;
};

// Deterministic two-variable Nelder-Mead over the junction anomalies.
template <typename F>
std::pair<std::array<double, 2>, NmEval> nm2(F&& fn, std::array<double, 2> x0,
                                             double step, int iters = 240) {
    std::array<std::array<double, 2>, 3> pts = {
        x0, {x0[0] + step, x0[1]}, {x0[0], x0[1] + step}};
    std::array<NmEval, 3> vals = {fn(pts[0]), fn(pts[1]), fn(pts[2])};
    const auto order_points = [&] {
        std::array<int, 3> idx = {0, 1, 2};
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return vals[a].cost < vals[b].cost; });
        const auto p = pts;
        const auto v = vals;
        for (int k = 0; k < 3; ++k) {
            pts[k] = p[idx[k]];
            vals[k] = v[idx[k]];
        }
    };
    for (int it = 0; it < iters; ++it) {
        order_points();
        if (vals[0].cost < 1e8 && vals[2].cost - vals[0].cost < 1e-13) break;
        const auto& b = pts[0];
        const auto& s = pts[1];
        const auto& w = pts[2];
        const std::array<double, 2> c = {0.5 * (b[0] + s[0]), 0.5 * (b[1] + s[1])};
        const std::array<double, 2> xr = {2.0 * c[0] - w[0], 2.0 * c[1] - w[1]};
        NmEval fr = fn(xr);
        if (fr.cost < vals[0].cost) {
            const std::array<double, 2> xe = {3.0 * c[0] - 2.0 * w[0], 3.0 * c[1] - 2.0 * w[1]};
            NmEval fe = fn(xe);
            if (fe.cost < fr.cost) {
                pts[2] = xe;
                vals[2] = std::move(fe);
            } else {
                pts[2] = xr;
                vals[2] = std::move(fr);
            }
        } else if (fr.cost < vals[1].cost) {
            pts[2] = xr;
            vals[2] = std::move(fr);
        } else {
            const std::array<double, 2> xc = {0.5 * (c[0] + w[0]), 0.5 * (c[1] + w[1])};
            NmEval fc = fn(xc);
            if (fc.cost < vals[2].cost) {
                pts[2] = xc;
                vals[2] = std::move(fc);
            } else {
                pts[1] = {0.5 * (b[0] + s[0]), 0.5 * (b[1] + s[1])};
                vals[1] = fn(pts[1]);
                pts[2] = {0.5 * (b[0] + w[0]), 0.5 * (b[1] + w[1])};
                vals[2] = fn(pts[2]);
            }
        }
    }
    order_points();
    return {pts[0], vals[0]};
}

}  // namespace

Result<OptimalLeg> solve_leg(const MoonParams& moon, const SystemModel& sys,
                             const LegProblem& problem) {
    const ResonanceFamily& fam = problem.family;
    const double vm_kms = circular_velocity(moon, sys);
    const double v = problem.vinf_mps / 1000.0 / vm_kms;
    const double dvz = problem.dvinf_mps / 1000.0 / vm_kms;
    const double day_per_nd = moon.period_days / (2.0 * kPi);

    auto bal = solve_ballistic(moon, sys, fam, problem.vinf_mps);
    if (!bal.ok())
        return Result<OptimalLeg>(ErrorCode::SeedInfeasible,
                                  "no ballistic anchor: " + bal.message());

    OptimalLeg leg;
    leg.theta1_deg = bal->theta1_deg;
    leg.theta2_deg = bal->theta2_deg;
    leg.alpha_dep_deg = bal->alpha_deg;
    leg.alpha_arr_deg = bal->alpha_deg;
    leg.tof_days = bal->tof_days;
    leg.vinf_dep_mps = problem.vinf_mps + problem.dvinf_mps;
    leg.vinf_arr_mps = problem.vinf_mps - problem.dvinf_mps;

    if (problem.dvinf_mps == 0.0) {
        EqsOut z;
        const double a0 = bal->alpha_deg * kRadPerDeg;
        if (junction_eqs(fam, v, v, bal->f1_seed_rad, bal->f2_seed_rad, a0, a0, z)) {
            leg.dt1_days = z.t1 * day_per_nd;
            leg.dt2_days = z.t2r * day_per_nd;
            leg.junction_radius_km = z.rj * moon.a_km;
            leg.position_miss_km = std::abs(z.e1) * moon.a_km;
            leg.time_miss_days = std::abs(z.e2) * day_per_nd;
        }
        return Result<OptimalLeg>(leg);
    }

    if (leg.vinf_dep_mps <= 0.0 || leg.vinf_arr_mps <= 0.0)
        return Result<OptimalLeg>(ErrorCode::SeedInfeasible,
                                  "split excess speed is not positive");

    // Continuation from the ballistic junction in splits of <= ~10 m/s so
    // every Nelder-Mead run starts inside its predecessor's basin.
    const double step_nd = (10.0 / 1000.0) / vm_kms;
    const int nstep = std::max(1, static_cast<int>(std::ceil(std::abs(dvz) / step_nd)));
    double phi = bal->f1_seed_rad, f2 = bal->f2_seed_rad;
    double ad = bal->alpha_deg * kRadPerDeg, aa = ad;
    std::optional<InnerOut> sol;
    static constexpr double kSimplexScalesDeg[3] = {1.0, 0.25, 3.0};
    for (int k = 1; k <= nstep; ++k) {
        const double dvk = dvz * k / nstep;
        const double vd = v + dvk, va = v - dvk;
        const double ad0 = ad, aa0 = aa;
        const auto evalpt = [&](std::array<double, 2> x) -> NmEval {
            auto g = inner_solve(fam, vd, va, x[0], x[1], ad0, aa0);
            if (!g) return NmEval{};
            NmEval e;
            e.cost = g->dv;
            e.inner = std::move(g);
            return e;
        };
        bool found = false;
        for (double scale : kSimplexScalesDeg) {
            auto [x, best] = nm2(evalpt, {phi, f2}, scale * kRadPerDeg);
            if (best.inner) {
                phi = x[0];
                f2 = x[1];
                ad = best.inner->ad;
                aa = best.inner->aa;
                sol = std::move(best.inner);
                found = true;
                break;
            }
        }
        if (!found)
            return Result<OptimalLeg>(ErrorCode::SolverDiverged,
                                      "continuation lost the solution branch for " +
                                          fam.label());
    }

    leg.dv_mps = sol->dv * vm_kms * 1000.0;
    leg.tof_days = sol->eq.tf * day_per_nd;
    leg.theta1_deg = sol->eq.th1 * kDegPerRad;
    leg.theta2_deg = sol->eq.th2 * kDegPerRad;
    leg.alpha_dep_deg = sol->ad * kDegPerRad;
    leg.alpha_arr_deg = sol->aa * kDegPerRad;
    leg.dt1_days = sol->eq.t1 * day_per_nd;
    leg.dt2_days = sol->eq.t2r * day_per_nd;
    leg.junction_radius_km = sol->eq.rj * moon.a_km;
    leg.position_miss_km = std::abs(sol->eq.e1) * moon.a_km;
    leg.time_miss_days = std::abs(sol->eq.e2) * day_per_nd;
    return Result<OptimalLeg>(leg);
}

const MoonTable::FamilyRows* MoonTable::find(const ResonanceFamily& fam) const {
    for (const auto& fr : families) {
        if (fr.family.M == fam.M && fr.family.N == fam.N && fr.family.p == fam.p &&
            fr.family.q == fam.q)
            return &fr;
    }
    return nullptr;
}

double family_vinf_floor_mps(const MoonParams& moon, const SystemModel& sys,
                             const ResonanceFamily& fam) {
    const double ratio = static_cast<double>(fam.N) / fam.M;
    const double vsc2 = 2.0 - std::pow(ratio, 2.0 / 3.0);
    if (vsc2 <= 0.0) return 1e18;  // ratio unreachable at any excess speed
    const double vm = circular_velocity(moon, sys);
    return std::abs(std::sqrt(vsc2) - 1.0) * vm * 1000.0;
}

MoonTable build_moon_table(const MoonParams& moon, const SystemModel& sys,
                           const VinfWindow& window, double grid_step_mps, int workers,
                           BuildStats* stats) {
    MoonTable table;
    table.moon_idx = moon_index(moon.name);
    for (int k = 0;; ++k) {
        const double v = window.vmin_mps + k * grid_step_mps;
        if (v > window.vmax_mps + 1e-9) break;
        table.grid_mps.push_back(v);
    }
    if (table.grid_mps.empty() || table.grid_mps.back() < window.vmax_mps - 1e-9)
        table.grid_mps.push_back(window.vmax_mps);

    const auto fams = enumerate_families(moon, sys, window);
    const size_t ng = table.grid_mps.size();
    table.families.resize(fams.size());
    for (size_t fi = 0; fi < fams.size(); ++fi) {
        table.families[fi].family = fams[fi];
        table.families[fi].present.assign(ng, 0);
        table.families[fi].record.resize(ng);
    }

    enum class Outcome : char { Kept, Infeasible, Dropped };
    std::vector<Outcome> outcomes(fams.size() * ng, Outcome::Infeasible);

    parallel_for(fams.size() * ng, workers, [&](size_t idx) {
        const size_t fi = idx / ng, gi = idx % ng;
        const ResonanceFamily& fam = fams[fi];
        const double vinf = table.grid_mps[gi];
        auto bal = solve_ballistic(moon, sys, fam, vinf);
        if (!bal.ok()) {
            outcomes[idx] = Outcome::Infeasible;
            return;
        }
        auto probe = solve_leg(moon, sys, {fam, vinf, kProbeSplitMps});
        if (!probe.ok() || probe->dv_mps < 1e-9 ||
            probe->dv_mps > kProbeQualityRatio * kProbeSplitMps || probe->tof_days <= 0.0) {
            outcomes[idx] = Outcome::Dropped;
            return;
        }
        ViltRecord rec;
        rec.moon_idx = table.moon_idx;
        rec.family = fam;
        rec.vinf_mps = vinf;
        rec.tof_days = bal->tof_days;
        rec.alpha_deg = bal->alpha_deg;
        const double dv5 = probe->dv_mps;
        rec.dvinfdep_dDV = kProbeSplitMps / dv5;
        rec.dvinfarr_dDV = -kProbeSplitMps / dv5;
        rec.dtof_dDV = (probe->tof_days - bal->tof_days) / dv5;
        rec.dalphadep_dDV = (probe->alpha_dep_deg - bal->alpha_deg) / dv5;
        rec.dalphaarr_dDV = (probe->alpha_arr_deg - bal->alpha_deg) / dv5;
        table.families[fi].record[gi] = rec;
        table.families[fi].present[gi] = 1;
        outcomes[idx] = Outcome::Kept;
    });

    if (stats) {
        stats->grid_points = static_cast<int>(ng);
        stats->families = static_cast<int>(fams.size());
        for (Outcome o : outcomes) {
            if (o == Outcome::Kept) ++stats->records;
            else if (o == Outcome::Infeasible) ++stats->infeasible;
            else ++stats->dropped;
        }
    }
    return table;
}

Result<ViltRecord> interpolate(const MoonTable& table, const ResonanceFamily& fam,
                               double vinf_mps) {
    const auto* rows = table.find(fam);
    if (!rows)
        return Result<ViltRecord>(ErrorCode::OutOfSpan,
                                  "no records for family " + fam.label());
    const auto& grid = table.grid_mps;
    if (grid.empty() || vinf_mps < grid.front() - 1e-9 || vinf_mps > grid.back() + 1e-9)
        return Result<ViltRecord>(ErrorCode::OutOfSpan, "excess speed outside the grid");
    // Exact grid hit returns the stored record unchanged.
    const auto at = std::lower_bound(grid.begin(), grid.end(), vinf_mps - 1e-9);
    const size_t hi = static_cast<size_t>(at - grid.begin());
    if (hi < grid.size() && std::abs(grid[hi] - vinf_mps) <= 1e-9) {
        if (!rows->present[hi])
            return Result<ViltRecord>(ErrorCode::OutOfSpan,
                                      "family has no record at this grid point");
        return Result<ViltRecord>(rows->record[hi]);
    }
    if (hi == 0 || hi >= grid.size())
        return Result<ViltRecord>(ErrorCode::OutOfSpan, "excess speed outside the grid");
    const size_t lo = hi - 1;
    if (!rows->present[lo] || !rows->present[hi])
        return Result<ViltRecord>(ErrorCode::OutOfSpan,
                                  "interval endpoint missing for " + fam.label());
    const ViltRecord& a = rows->record[lo];
    const ViltRecord& b = rows->record[hi];
    const double t = (vinf_mps - grid[lo]) / (grid[hi] - grid[lo]);
    ViltRecord out = a;
    out.vinf_mps = vinf_mps;
    out.tof_days = a.tof_days + t * (b.tof_days - a.tof_days);
    out.alpha_deg = a.alpha_deg + t * (b.alpha_deg - a.alpha_deg);
    out.dtof_dDV = a.dtof_dDV + t * (b.dtof_dDV - a.dtof_dDV);
    out.dvinfdep_dDV = a.dvinfdep_dDV + t * (b.dvinfdep_dDV - a.dvinfdep_dDV);
    out.dvinfarr_dDV = a.dvinfarr_dDV + t * (b.dvinfarr_dDV - a.dvinfarr_dDV);
    out.dalphadep_dDV = a.dalphadep_dDV + t * (b.dalphadep_dDV - a.dalphadep_dDV);
    out.dalphaarr_dDV = a.dalphaarr_dDV + t * (b.dalphaarr_dDV - a.dalphaarr_dDV);
    return Result<ViltRecord>(out);
}

Result<LegEstimate> leg_from_departure(const MoonParams& moon, const SystemModel& sys,
                                       const ViltRecord& rec, double required_vinf_dep_mps,
                                       double dv_cap_mps) {
    LegEstimate est;
    est.dv_mps = (required_vinf_dep_mps - rec.vinf_mps) / rec.dvinfdep_dDV;
    if (std::abs(est.dv_mps) > dv_cap_mps + 1e-12)
        return Result<LegEstimate>(ErrorCode::DeltaVCapExceeded,
                                   "impulse above the per-leg cap");
    est.vinf_dep_mps = required_vinf_dep_mps;
    est.vinf_arr_mps = rec.vinf_mps + rec.dvinfarr_dDV * est.dv_mps;
    const double floor = family_vinf_floor_mps(moon, sys, rec.family);
    if (est.vinf_arr_mps < floor - 1e-9)
        return Result<LegEstimate>(ErrorCode::BelowFamilyFloor,
                                   "arrival speed below the family floor");
    est.tof_days = rec.tof_days + rec.dtof_dDV * est.dv_mps;
    est.alpha_dep_deg = rec.alpha_deg + rec.dalphadep_dDV * est.dv_mps;
    est.alpha_arr_deg = rec.alpha_deg + rec.dalphaarr_dDV * est.dv_mps;
    return Result<LegEstimate>(est);
}

static const char* kDbHeader =
    "moon,M,N,p,q,vinf_mps,tof_days,alpha_deg,dtof_dDV_days_per_mps,dvinfdep_dDV,"
    "dvinfarr_dDV,dalphadep_dDV_deg_per_mps,dalphaarr_dDV_deg_per_mps";

static void write_moon_table_rows(std::ostream& os, const MoonTable& table,
                                  const SystemModel& sys) {
    const std::string& name = sys.moon(table.moon_idx).name;
    for (const auto& fr : table.families) {
        for (size_t gi = 0; gi < table.grid_mps.size(); ++gi) {
            if (!fr.present[gi]) continue;
            const ViltRecord& r = fr.record[gi];
            os << name << ',' << fr.family.M << ',' << fr.family.N << ',' << fr.family.p
               << ',' << fr.family.q << ',' << format_sig12(r.vinf_mps) << ','
               << format_sig12(r.tof_days) << ',' << format_sig12(r.alpha_deg) << ','
               << format_sig12(r.dtof_dDV) << ',' << format_sig12(r.dvinfdep_dDV) << ','
               << format_sig12(r.dvinfarr_dDV) << ',' << format_sig12(r.dalphadep_dDV)
               << ',' << format_sig12(r.dalphaarr_dDV) << '\n';
        }
    }
}

void write_moon_table_csv(std::ostream& os, const MoonTable& table,
                          const SystemModel& sys) {
    os << kDbHeader << '\n';
    write_moon_table_rows(os, table, sys);
}

void write_database_csv(std::ostream& os, const ViltDatabase& db, const SystemModel& sys) {
    os << kDbHeader << '\n';
    for (const auto& table : db.moons) write_moon_table_rows(os, table, sys);
}

Result<ViltDatabase> read_database_csv(std::istream& is, const SystemModel& sys) {
    std::string line;
    if (!std::getline(is, line))
        return Result<ViltDatabase>(ErrorCode::ParseError, "empty database file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kDbHeader)
        return Result<ViltDatabase>(ErrorCode::ParseError, "unexpected database header");

    std::vector<std::vector<ViltRecord>> per_moon(kMoonCount);
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 13)
            return Result<ViltDatabase>(ErrorCode::ParseError,
                                        "line " + std::to_string(lineno) +
                                            ": expected 13 fields");
        ViltRecord r;
        r.moon_idx = moon_index(f[0]);
        if (r.moon_idx < 0)
            return Result<ViltDatabase>(ErrorCode::ParseError,
                                        "line " + std::to_string(lineno) +
                                            ": unknown moon " + f[0]);
        const auto geti = [&](int i) { return parse_int(f[static_cast<size_t>(i)]); };
        const auto getd = [&](int i) { return parse_double(f[static_cast<size_t>(i)]); };
        auto m = geti(1), n = geti(2), p = geti(3), q = geti(4);
        auto vals = std::array{getd(5), getd(6), getd(7), getd(8),
                               getd(9), getd(10), getd(11), getd(12)};
        if (!m.ok() || !n.ok() || !p.ok() || !q.ok())
            return Result<ViltDatabase>(ErrorCode::ParseError,
                                        "line " + std::to_string(lineno) +
                                            ": bad family field");
        for (const auto& v : vals)
            if (!v.ok())
                return Result<ViltDatabase>(ErrorCode::ParseError,
                                            "line " + std::to_string(lineno) +
                                                ": bad numeric field");
        r.family = {static_cast<int>(*m), static_cast<int>(*n), static_cast<int>(*p),
                    static_cast<int>(*q)};
        r.vinf_mps = *vals[0];
        r.tof_days = *vals[1];
        r.alpha_deg = *vals[2];
        r.dtof_dDV = *vals[3];
        r.dvinfdep_dDV = *vals[4];
        r.dvinfarr_dDV = *vals[5];
        r.dalphadep_dDV = *vals[6];
        r.dalphaarr_dDV = *vals[7];
        per_moon[static_cast<size_t>(r.moon_idx)].push_back(r);
    }

    ViltDatabase db;
    db.moons.resize(static_cast<size_t>(kMoonCount));
    for (int mi = 0; mi < kMoonCount; ++mi) {
        db.moons[static_cast<size_t>(mi)].moon_idx = mi;
        auto& recs = per_moon[static_cast<size_t>(mi)];
        if (recs.empty()) continue;
        MoonTable table;
        table.moon_idx = mi;
        for (const auto& r : recs) table.grid_mps.push_back(r.vinf_mps);
        std::sort(table.grid_mps.begin(), table.grid_mps.end());
        table.grid_mps.erase(std::unique(table.grid_mps.begin(), table.grid_mps.end(),
                                         [](double a, double b) {
                                             return std::abs(a - b) <= 1e-9;
                                         }),
                             table.grid_mps.end());
        std::stable_sort(recs.begin(), recs.end(), [](const ViltRecord& a,
                                                      const ViltRecord& b) {
            const auto ka = std::array{a.family.M, a.family.N, a.family.p, a.family.q};
            const auto kb = std::array{b.family.M, b.family.N, b.family.p, b.family.q};
            if (ka != kb) return ka < kb;
            return a.vinf_mps < b.vinf_mps;
        });
        const size_t ng = table.grid_mps.size();
        const auto grid_slot = [&](double v) -> size_t {
            const auto at = std::lower_bound(table.grid_mps.begin(), table.grid_mps.end(),
                                             v - 1e-9);
            return static_cast<size_t>(at - table.grid_mps.begin());
        };
        for (const auto& r : recs) {
            if (table.families.empty() ||
                std::array{table.families.back().family.M, table.families.back().family.N,
                           table.families.back().family.p,
                           table.families.back().family.q} !=
                    std::array{r.family.M, r.family.N, r.family.p, r.family.q}) {
                MoonTable::FamilyRows fr;
                fr.family = r.family;
                fr.present.assign(ng, 0);
                fr.record.resize(ng);
                table.families.push_back(std::move(fr));
            }
            const size_t gi = grid_slot(r.vinf_mps);
            if (gi >= ng || std::abs(table.grid_mps[gi] - r.vinf_mps) > 1e-9)
                return Result<ViltDatabase>(ErrorCode::ParseError,
                                            "record speed off the reconstructed grid");
            table.families.back().present[gi] = 1;
            table.families.back().record[gi] = r;
        }
        db.moons[static_cast<size_t>(mi)] = std::move(table);
    }
    (void)sys;
    return Result<ViltDatabase>(db);
}

}  // namespace pumpdown
