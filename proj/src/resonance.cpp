#include "pumpdown/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <tuple>

namespace pumpdown {

std::string ResonanceFamily::label() const {
    std::string s = std::to_string(M) + ":" + std::to_string(N) + "^(";
    s += (p > 0 ? "+" : "-");
    s += ",";
    s += (q > 0 ? "+" : "-");
    s += ")";
    return s;
}

void resonance_ratio_window(const MoonParams& moon, const SystemModel& sys,
                            double vinf_mps, double& lo, double& hi) {
    const double vm = circular_velocity(moon, sys);
    const double v = vinf_mps / 1000.0;
    // Slowest reachable SC speed (V_M + V_inf, apo-heavy orbit) bounds the
    // ratio from below; fastest (V_M - V_inf) from above:
    // N/M = (2 - (V_SC/V_M)^2)^(3/2) in circular-moon units.
    const double blo = 2.0 - ((vm + v) / vm) * ((vm + v) / vm);
    const double bhi = 2.0 - ((vm - v) / vm) * ((vm - v) / vm);
    lo = std::pow(std::max(blo, 0.0), 1.5);
    hi = std::pow(std::max(bhi, 0.0), 1.5);
}

std::array<VinfWindow, kMoonCount> default_vinf_windows() {
    return {{{1200.0, 1600.0, 2},
             {650.0, 1900.0, 15},
             {550.0, 1000.0, 15},
             {550.0, 900.0, 16},
             {200.0, 850.0, 25}}};
}

std::vector<ResonanceFamily> enumerate_families(const MoonParams& moon,
                                               const SystemModel& sys,
                                               const VinfWindow& window) {
    double lo = 0.0, hi = 0.0;
    resonance_ratio_window(moon, sys, window.vmax_mps, lo, hi);
    std::vector<ResonanceFamily> fams;
    for (int m = 1; m <= window.max_m; ++m) {
        for (int n = 1; n <= static_cast<int>(hi * m + 1e-9) + 1; ++n) {
            const double ratio = static_cast<double>(n) / m;
            if (ratio < lo - 1e-15 || ratio > hi + 1e-15) continue;
            if (std::gcd(m, n) != 1) continue;
            if (m == 1 && n == 1) continue;  // added below with its variants
            fams.push_back({m, n, +1, +1});
        }
    }
    fams.push_back({1, 1, -1, +1});
    fams.push_back({1, 1, +1, -1});
    fams.push_back({1, 1, +1, +1});
    std::sort(fams.begin(), fams.end(), [](const ResonanceFamily& a, const ResonanceFamily& b) {
        if (a.M != b.M) return a.M < b.M;
        if (a.N != b.N) return a.N < b.N;
        if (a.p != b.p) return a.p < b.p;
        return a.q < b.q;
    });
    return fams;
}

int extra_rev_index(const ResonanceFamily& fam) {
    if (fam.M > fam.N || (fam.M == fam.N && fam.p == -1 && fam.q == +1)) return 0;
    return fam.p;
}

int transfer_angle_rev_index(const ResonanceFamily& fam) {
    return fam.p == fam.q ? 0 : extra_rev_index(fam);
}

int placement_rev_index(const ResonanceFamily& fam) {
    if (fam.p == fam.q) return fam.M > fam.N ? 0 : fam.p;
    return extra_rev_index(fam);
}

namespace {

// Everything below works in circular-moon units: moon orbit radius = 1,
// moon speed = 1, GM = 1, so the moon advances one radian of longitude per
// unit time and its period is 2*pi.

// Same-direction pump angle: the resonant SC speed fixes the velocity
// triangle. Returns nullopt when the excess speed cannot close it.
std::optional<double> same_direction_alpha(int m, int n, double v) {
    const double ratio = static_cast<double>(n) / m;
    const double vsc2 = 2.0 - std::pow(ratio, 2.0 / 3.0);
    const double arg = (vsc2 - 1.0 - v * v) / (2.0 * v);
    if (std::abs(arg) > 1.0) return std::nullopt;
    return std::acos(arg);
}

struct Case2Eval {
    double resid;  // SC phasing time minus moon phasing time
    double f;      // encounter anomaly magnitude, rad
};

double mean_from_true(double e, double f) {
    const double ecc = kepler::eccentric_from_true(e, f);
    return ecc - e * std::sin(ecc);
}

std::optional<Case2Eval> case2_residual(const ResonanceFamily& fam, double v, double alpha) {
    const double vt = 1.0 + v * std::cos(alpha);
    const double vr = v * std::sin(alpha);
    kepler::Elements el;
    if (!kepler::elements_from_state(1.0, 1.0, vr, vt, el)) return std::nullopt;
    if (el.e < 1e-14) return std::nullopt;
    const double cf = (el.h * el.h - 1.0) / el.e;
    if (std::abs(cf) > 1.0) return std::nullopt;
    const double f = std::acos(std::clamp(cf, -1.0, 1.0));
    const int d = extra_rev_index(fam);
    const double fp = fam.p * f, fq = fam.q * f;
    const double tsc = std::pow(el.a, 1.5) * (2.0 * kPi * (fam.N + d) +
                                              mean_from_true(el.e, fq) -
                                              mean_from_true(el.e, fp));
    const double tm = 2.0 * kPi * (fam.M + d) + fq - fp;
    return Case2Eval{tsc - tm, f};
}

// Scan [0.05 deg, 180 deg) in 0.05 deg steps, bisect every sign change, and
// return the root closest to the same-direction angle.
std::optional<double> case2_scan_bisect(const ResonanceFamily& fam, double v, double alpha0) {
    std::optional<double> best;
    std::optional<std::pair<double, double>> prev;
    for (int i = 1; i < 3600; ++i) {
        const double x = (static_cast<double>(i) / 20.0) * kRadPerDeg;
        auto r = case2_residual(fam, v, x);
        if (!r) {
            prev.reset();
            continue;
        }
        if (prev && prev->second * r->resid < 0.0) {
            double lo = prev->first, hi = x, glo = prev->second;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                auto g = case2_residual(fam, v, mid);
                if (!g) break;
                if (glo * g->resid < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = g->resid;
                }
            }
            const double cand = 0.5 * (lo + hi);
            if (!best || std::abs(cand - alpha0) < std::abs(*best - alpha0)) best = cand;
        }
        prev = {x, r->resid};
    }
    return best;
}

}  // namespace

Result<BallisticSolution> solve_ballistic(const MoonParams& moon, const SystemModel& sys,
                                          const ResonanceFamily& fam, double vinf_mps) {
    const double vm = circular_velocity(moon, sys);
    const double v = vinf_mps / 1000.0 / vm;
    if (v <= 0.0)
        return Result<BallisticSolution>(ErrorCode::ValidationError,
                                         "excess speed must be positive");
    auto alpha0 = same_direction_alpha(fam.M, fam.N, v);
    if (!alpha0)
        return Result<BallisticSolution>(
            ErrorCode::InfeasibleResonance,
            fam.label() + " is not reachable at this excess speed");

    double alpha = *alpha0, f = 0.0, tof_nd = 0.0;
    if (fam.p == fam.q) {
        kepler::Elements el;
        const double vt = 1.0 + v * std::cos(alpha);
        const double vr = v * std::sin(alpha);
        if (!kepler::elements_from_state(1.0, 1.0, vr, vt, el))
            return Result<BallisticSolution>(ErrorCode::HyperbolicOrbit,
                                             "resonant state escaped in " + fam.label());
        f = el.e < 1e-14 ? 0.0 : std::abs(el.f);
        tof_nd = 2.0 * kPi * fam.M;
    } else {
        // Newton from the same-direction angle, dense-scan bisection backup.
        for (int it = 0; it < 50; ++it) {
            auto r0 = case2_residual(fam, v, alpha);
            if (!r0) break;
            const double hstep = 1e-7;
            auto rp = case2_residual(fam, v, alpha + hstep);
            auto rm = case2_residual(fam, v, alpha - hstep);
            if (!rp || !rm) break;
            const double d = (rp->resid - rm->resid) / (2.0 * hstep);
            if (d == 0.0) break;
            double next = alpha - r0->resid / d;
            next = std::clamp(next, 1e-9, kPi - 1e-9);
            if (std::abs(next - alpha) < 1e-14) {
                alpha = next;
                break;
            }
            alpha = next;
        }
        auto check = case2_residual(fam, v, alpha);
        if (!check || std::abs(check->resid) > 1e-9) {
            auto scanned = case2_scan_bisect(fam, v, *alpha0);
            if (!scanned)
                return Result<BallisticSolution>(
                    ErrorCode::NoConvergence,
                    "phasing root not found for " + fam.label());
            alpha = *scanned;
            check = case2_residual(fam, v, alpha);
            if (!check || std::abs(check->resid) > 1e-9)
                return Result<BallisticSolution>(
                    ErrorCode::NoConvergence,
                    "phasing residual did not close for " + fam.label());
        }
        f = check->f;
        const int d = extra_rev_index(fam);
        tof_nd = 2.0 * kPi * (fam.M + d) + fam.q * f - fam.p * f;
    }

    BallisticSolution out;
    out.alpha_deg = alpha * kDegPerRad;
    out.f_deg = f * kDegPerRad;
    // Moon longitude advances 2*pi per cataloged period, so unit time maps
    // to period/(2*pi) days.
    out.tof_days = tof_nd * moon.period_days / (2.0 * kPi);
    out.delta = transfer_angle_rev_index(fam);
    const double fp = fam.p * f, fq = fam.q * f;
    const double theta = 2.0 * kPi * (fam.N + out.delta) + fq - fp;
    const double th1 =
        kPi * (1.0 + placement_rev_index(fam) + 2.0 * (fam.N / 2)) - fp;
    const double th2 = theta - th1;
    out.theta1_deg = th1 * kDegPerRad;
    out.theta2_deg = th2 * kDegPerRad;
    out.f1_seed_rad = fp + th1;
    out.f2_seed_rad = fq - th2;
    return Result<BallisticSolution>(out);
}

Result<double> case2_alpha_bisection(const MoonParams& moon, const SystemModel& sys,
                                     const ResonanceFamily& fam, double vinf_mps) {
    const double vm = circular_velocity(moon, sys);
    const double v = vinf_mps / 1000.0 / vm;
    auto alpha0 = same_direction_alpha(fam.M, fam.N, v);
    if (!alpha0)
        return Result<double>(ErrorCode::InfeasibleResonance,
                              fam.label() + " is not reachable at this excess speed");
    auto root = case2_scan_bisect(fam, v, *alpha0);
    if (!root)
        return Result<double>(ErrorCode::NoConvergence,
                              "no phasing sign change found for " + fam.label());
    return Result<double>(*root * kDegPerRad);
}

std::vector<MapSample> sample_pump_vinf_map(const MoonParams& moon, const SystemModel& sys,
                                            const std::vector<ResonanceFamily>& families,
                                            const std::vector<double>& vinf_grid_mps) {
    std::vector<MapSample> out;
    for (const ResonanceFamily& fam : families) {
        for (double v : vinf_grid_mps) {
            auto sol = solve_ballistic(moon, sys, fam, v);
            if (!sol.ok()) continue;
            out.push_back({fam, v, sol->alpha_deg, sol->tof_days});
        }
    }
    std::sort(out.begin(), out.end(), [](const MapSample& a, const MapSample& b) {
        return std::make_tuple(a.family.M, a.family.N, a.family.p, a.family.q, a.vinf_mps) <
               std::make_tuple(b.family.M, b.family.N, b.family.p, b.family.q, b.vinf_mps);
    });
    return out;
}

}  // namespace pumpdown
