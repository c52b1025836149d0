#include "kgsplit/inner.hpp"

#include <algorithm>

#include "kgsplit/model.hpp"
#include "kgsplit/ode.hpp"

namespace kgsplit {

namespace {

using Lift = std::vector<XComplex>;

Lift lift_row(const std::vector<XComplex>& modes, int band, const PrecisionContext& ctx) {
    Lift p(2 * band + 1, XComplex(ctx));
    for (size_t m = 0; m < modes.size(); ++m) {
        int n = 2 * static_cast<int>(m) + 1;
        if (n > band) break;
        p[band + n] = modes[m];
        p[band - n] = -modes[m];
    }
    return p;
}

// g(u) = u^3/3 + f(u) as a coefficient list over odd powers
std::vector<XReal> g_coeffs(const OddPowerSeries& f, const PrecisionContext& ctx) {
    std::vector<XReal> g(std::max(1, f.terms()), ctx.zero());
    g[0] = ctx.real(1, 3);
    for (int d = 1; d <= f.terms(); ++d) g[d - 1] += f.c[d - 1];
    return g;
}

XComplex times_i_pow(const XComplex& t, int e) {
    switch (((e % 4) + 4) % 4) {
        case 1: return {-t.im, t.re};
        case 2: return -t;
        case 3: return {t.im, -t.re};
        default: return t;
    }
}

} // namespace

PhasePointC inner_vector_field(const PhasePointC& phi, const OddPowerSeries& f,
                               TruncationInfo* info) {
    if (phi.v.c.empty()) throw ConfigError("inner_vector_field: empty state");
    PrecisionContext ctx = context_of(phi.v.c[0]);
    const int m = phi.v.count();
    OddPowerSeries g;
    g.c = g_coeffs(f, ctx);
    g.radius = f.radius;
    XComplex one{ctx.real(1.0), ctx.zero()};
    OddSineSeries G = compose_odd(g, phi.v, one, phi.v.n_max(), info);
    PhasePointC out{phi.w, OddSineSeries(ctx, 1, m)};
    for (int mm = 0; mm < m; ++mm) {
        long n = 2 * mm + 1;
        out.w.c[mm] = phi.v.c[mm] * ctx.real(-(n * n - 1), 1) - G.c[mm];
    }
    return out;
}

XComplex FormalModeSeries::coeff(int n, int j, const PrecisionContext& ctx) const {
    if (n <= 0 || n % 2 == 0) throw ConfigError("FormalModeSeries::coeff: mode must be odd");
    int m = (n - 1) / 2;
    if (j < 1 || j > Jmax || m >= mode_count()) return XComplex(ctx);
    return c[j - 1][m];
}

FormalModeSeries formal_inner_series(const OddPowerSeries& f, int n_modes_max, int Jmax,
                                     const PrecisionContext& ctx) {
    if (Jmax < 5) throw ConfigError("formal_inner_series: Jmax must be >= 5");
    if (n_modes_max < 3 || n_modes_max % 2 == 0)
        throw ConfigError("formal_inner_series: n_max must be odd and >= 3");
    if (Jmax % 2 == 0) ++Jmax;
    const int keep = n_modes_max;
    const int wide = 3 * keep;
    const int m = (keep + 1) / 2;
    std::vector<XReal> g = g_coeffs(f, ctx);
    const int D = static_cast<int>(g.size());

    FormalModeSeries out;
    out.n_max = keep;
    out.Jmax = Jmax;
    out.c.assign(Jmax, std::vector<XComplex>(m, XComplex(ctx)));
    out.beta.assign(Jmax, std::vector<XComplex>(std::max(0, m - 1), XComplex(ctx)));
    out.gevrey_sup = XReal(ctx);

    // leading term phi_1 = -2 sqrt2 i / z
    out.c[0][0] = XComplex{ctx.zero(), -(ctx.real(2.0) * ctx.sqrt2())};

    std::vector<Lift> Phi(Jmax + 3);
    Phi[1] = lift_row(out.c[0], keep, ctx);
    std::vector<Lift> SQ(Jmax + 4);
    // wideD[d-1][j]: wide-band row of phi^{2d+1} at inverse-power order j;
    // POW[d-1][j]: its keep-band truncation (input to the next power)
    std::vector<std::vector<Lift>> wideD(D, std::vector<Lift>(Jmax + 3));
    std::vector<std::vector<Lift>> POW(D, std::vector<Lift>(Jmax + 3));
    Lift pending;        // lift of the last late-inserted mode-1 coefficient
    int sq_built = 0;

    auto build_sq_through = [&](int j_target) {
        for (int j = sq_built + 2; j <= j_target; j += 2) {
            Lift acc(2 * 2 * keep + 1, XComplex(ctx));
            for (int a = 1; a <= j - 1; a += 2) {
                if (Phi[a].empty() || Phi[j - a].empty()) continue;
                Lift t = detail::convolve(Phi[a], keep, 1, Phi[j - a], keep, 1, 2 * keep, ctx);
                for (size_t i = 0; i < acc.size(); ++i) acc[i] += t[i];
            }
            SQ[j] = std::move(acc);
            sq_built = j;
        }
    };

    auto build_wide_at = [&](int order) {
        if (order > Jmax + 2) return;
        for (int d = 1; d <= D; ++d) {
            if (order < 2 * d + 1) continue;
            Lift acc(2 * wide + 1, XComplex(ctx));
            for (int a = 2; a <= order - (2 * d - 1); a += 2) {
                if (SQ[a].empty()) continue;
                const Lift& prev = (d == 1) ? Phi[order - a] : POW[d - 2][order - a];
                if (prev.empty()) continue;
                Lift t = detail::convolve(SQ[a], 2 * keep, 0, prev, keep, 1, wide, ctx);
                for (size_t i = 0; i < acc.size(); ++i) acc[i] += t[i];
            }
            wideD[d - 1][order] = std::move(acc);
        }
    };

    auto gs_at = [&](int order, int n) {
        XComplex r(ctx);
        XReal factor = ctx.real(1.0);
        const XReal minus_quarter = ctx.real(-1, 4);
        for (int d = 1; d <= D; ++d) {
            factor *= minus_quarter;
            if (g[d - 1].is_zero()) continue;
            if (order > Jmax + 2) continue;
            const Lift& row = wideD[d - 1][order];
            if (row.empty() || n > wide) continue;
            r += row[wide + n] * (g[d - 1] * factor);
        }
        return r;
    };

    XReal resonance_floor = pow2(ctx, -(ctx.bits() / 2));
    XComplex prev_c3(ctx);

    build_sq_through(2);
    build_wide_at(3);

    for (int mtot = 3; mtot <= Jmax; mtot += 2) {
        // late mode-1 channel from the previous step enters only the cube row
        if (!pending.empty()) {
            Lift corr = detail::convolve(SQ[2], 2 * keep, 0, pending, keep, 1, wide, ctx);
            Lift& row = wideD[0][mtot];
            for (size_t i = 0; i < row.size(); ++i) row[i] += corr[i] * ctx.real(3.0);
            pending.clear();
        }
        for (int d = 1; d <= D; ++d) {
            const Lift& w = wideD[d - 1][mtot];
            if (w.empty()) continue;
            Lift t(2 * keep + 1, XComplex(ctx));
            for (int n = -keep; n <= keep; ++n) t[n + keep] = w[n + wide];
            POW[d - 1][mtot] = std::move(t);
        }

        if (mtot == 3) {
            // leading-order identity 2 c_{1,1} + Pi_1[g]_3 = 0
            XComplex resid = out.c[0][0] * ctx.real(2.0) + gs_at(3, 1);
            if (abs(resid) > pow2(ctx, -(ctx.bits() - 24)))
                throw ConfigError("formal_inner_series: leading-order identity failed");
        }
        for (int mm = 1; mm < m; ++mm) {
            int n = 2 * mm + 1;
            XComplex gs = gs_at(mtot, n);
            out.beta[mtot - 1][mm - 1] = -gs;
            XComplex prev = (mtot >= 5) ? out.c[mtot - 3][mm] : XComplex(ctx);
            XReal mu2 = ctx.real(static_cast<long>(n) * n - 1, 1);
            out.c[mtot - 1][mm] =
                -(gs + prev * ctx.real(static_cast<long>(mtot - 2) * (mtot - 1), 1)) / mu2;
        }
        Phi[mtot] = lift_row(out.c[mtot - 1], keep, ctx);

        // Gevrey-1 monitor on mode 3
        if (m > 1) {
            const XComplex& c3 = out.c[mtot - 1][1];
            XReal mag = abs(c3);
            if (!mag.is_zero()) {
                out.gevrey_sup = max(out.gevrey_sup, nth_root(mag / factorial(ctx, mtot), mtot));
                XReal pmag = abs(prev_c3);
                if (!pmag.is_zero() && mtot >= 5)
                    out.gevrey_ratio.emplace_back(
                        mtot, sqrt(mag / (pmag * ctx.real(static_cast<long>(mtot - 2) * (mtot - 1), 1))));
            }
            prev_c3 = c3;
        }

        // lookahead products give the late mode-1 coefficient c_{1,mtot}
        build_sq_through(mtot + 1);
        build_wide_at(mtot + 2);
        XComplex gs1 = gs_at(mtot + 2, 1);
        XReal divisor = ctx.real(static_cast<long>(mtot) * (mtot + 1) - 6, 1);
        if (abs(divisor) < resonance_floor)
            throw ConfigError("formal_inner_series: vanishing mode-1 divisor");
        XComplex c1 = -gs1 / divisor;
        out.c[mtot - 1][0] += c1;
        pending = lift_row(std::vector<XComplex>{c1}, keep, ctx);
        // patch the single stale pair (1, mtot) in SQ[mtot+1]
        if (!SQ[mtot + 1].empty()) {
            Lift t = detail::convolve(Phi[1], keep, 1, pending, keep, 1, 2 * keep, ctx);
            for (size_t i = 0; i < SQ[mtot + 1].size(); ++i) SQ[mtot + 1][i] += t[i] * ctx.real(2.0);
        }
        Phi[mtot] = lift_row(out.c[mtot - 1], keep, ctx);
    }
    return out;
}

SeedInfo seed_from_series(const FormalModeSeries& series, const XComplex& z0, int j_trunc,
                          const PrecisionContext& ctx, const XReal* error_budget) {
    const int m = series.mode_count();
    XReal mu3 = mu_n(ctx, 3);
    XReal az = abs(z0);
    if (j_trunc >= 0 && ctx.real(2 * j_trunc, 1) > mu3 * az)
        throw SeedError("seed_from_series: explicit truncation beyond mu_3 |z0| / 2");

    XComplex inv = XComplex{ctx.real(1.0), ctx.zero()} / z0;
    XReal ainv = abs(inv);
    std::vector<XReal> mags;
    mags.reserve(series.Jmax);
    {
        XReal p = ainv;
        for (int j = 1; j <= series.Jmax; ++j) {
            XReal row(ctx);
            for (int mm = 0; mm < m; ++mm) row += abs(series.c[j - 1][mm]);
            mags.push_back(row * p);
            p *= ainv;
        }
    }
    int j_use = j_trunc;
    if (j_use < 0) {
        // empirical Gevrey-1 optimum: argmin of the last-term size, j <= mu3 |z0|
        int cap = static_cast<int>(std::min<long>(series.Jmax, floor_long(mu3 * az)));
        int best = 3;
        XReal best_mag = mags[2];
        for (int j = 3; j <= cap; ++j) {
            if (!mags[j - 1].is_zero() && mags[j - 1] < best_mag) {
                best = j;
                best_mag = mags[j - 1];
            }
        }
        j_use = best;
    }
    j_use = std::min(j_use, series.Jmax);
    if (j_use < 1) throw SeedError("seed_from_series: empty truncation");

    SeedInfo out{InnerState{z0, PhasePointC{OddSineSeries(ctx, 1, m), OddSineSeries(ctx, 1, m)}},
                 XReal(ctx), j_use};
    std::vector<XComplex> val(m, XComplex(ctx)), dval(m, XComplex(ctx));
    XComplex zpow{ctx.real(1.0), ctx.zero()};
    for (int j = 1; j <= j_use; ++j) {
        zpow = zpow * inv;   // z^{-j}
        for (int mm = 0; mm < m; ++mm) {
            const XComplex& cj = series.c[j - 1][mm];
            if (cj.is_zero()) continue;
            val[mm] += cj * zpow;
            dval[mm] += cj * zpow * inv * ctx.real(-j, 1);
        }
    }
    for (int mm = 0; mm < m; ++mm) {
        out.state.phi.v.c[mm] = val[mm];
        out.state.phi.w.c[mm] = dval[mm];
    }
    out.error_estimate = mags[j_use - 1];
    if (error_budget && out.error_estimate > *error_budget)
        throw SeedError("seed_from_series: truncation error " + out.error_estimate.to_string(6) +
                        " above the caller budget");
    return out;
}

namespace {

// High-order Taylor propagator along an axis-parallel segment; the jet of
// Pi[g(phi)] is assembled with the same lifted convolutions as the static
// series algebra, with each power truncated back to the kept band.
class InnerTaylor {
  public:
    InnerTaylor(const OddPowerSeries& f, int n_max, const PrecisionContext& ctx, int order,
                const XReal& tol, const XReal& amp_hint, const XReal& trim_floor)
        : ctx_(ctx), keep_(n_max), wide_(3 * n_max), m_((n_max + 1) / 2), order_(order), tol_(tol),
          g_(g_coeffs(f, ctx)) {
        if (!amp_hint.is_nan() && !amp_hint.is_zero() && !trim_floor.is_nan() &&
            !trim_floor.is_zero()) {
            while (g_.size() > 1) {
                size_t d = g_.size();
                XReal bound = abs(g_[d - 1]) * pow_si(amp_hint, 2 * static_cast<long>(d) + 1);
                if (bound < trim_floor) g_.pop_back();
                else break;
            }
        }
    }

    XReal step(XComplex& z, PhasePointC& state, const XComplex& dir, const XReal& h_cap,
               XReal& err_accum) {
        const int O = order_;
        std::vector<std::vector<XComplex>> T(O + 1, std::vector<XComplex>(m_, XComplex(ctx_)));
        for (int mm = 0; mm < m_; ++mm) {
            T[0][mm] = state.v.c[mm];
            T[1][mm] = state.w.c[mm] * dir;
        }
        XComplex dir2 = dir * dir;
        std::vector<Lift> lifts(O + 1), SQt(O + 1);
        std::vector<std::vector<Lift>> POWt(g_.size(), std::vector<Lift>(O + 1));
        lifts[0] = lift_row(T[0], keep_, ctx_);
        lifts[1] = lift_row(T[1], keep_, ctx_);

        for (int o = 0; o + 2 <= O; ++o) {
            SQt[o] = Lift(2 * 2 * keep_ + 1, XComplex(ctx_));
            for (int a = 0; a <= o; ++a) {
                Lift t = detail::convolve(lifts[a], keep_, 1, lifts[o - a], keep_, 1, 2 * keep_, ctx_);
                for (size_t i = 0; i < SQt[o].size(); ++i) SQt[o][i] += t[i];
            }
            std::vector<XComplex> gs(m_, XComplex(ctx_));
            XReal factor = ctx_.real(1.0);
            const XReal minus_quarter = ctx_.real(-1, 4);
            for (size_t d = 1; d <= g_.size(); ++d) {
                Lift wrow(2 * wide_ + 1, XComplex(ctx_));
                const auto& prev_tbl = (d == 1) ? lifts : POWt[d - 2];
                for (int a = 0; a <= o; ++a) {
                    if (SQt[a].empty() || prev_tbl[o - a].empty()) continue;
                    Lift t = detail::convolve(SQt[a], 2 * keep_, 0, prev_tbl[o - a], keep_, 1, wide_,
                                              ctx_);
                    for (size_t i = 0; i < wrow.size(); ++i) wrow[i] += t[i];
                }
                factor *= minus_quarter;
                if (!g_[d - 1].is_zero()) {
                    XReal w = g_[d - 1] * factor;
                    for (int mm = 0; mm < m_; ++mm) gs[mm] += wrow[wide_ + 2 * mm + 1] * w;
                }
                if (d < g_.size()) {
                    Lift t(2 * keep_ + 1, XComplex(ctx_));
                    for (int n = -keep_; n <= keep_; ++n) t[n + keep_] = wrow[n + wide_];
                    POWt[d - 1][o] = std::move(t);
                }
            }
            for (int mm = 0; mm < m_; ++mm) {
                long n = 2 * mm + 1;
                XComplex acc = T[o][mm] * ctx_.real(-(n * n - 1), 1) - gs[mm];
                T[o + 2][mm] = acc * dir2 / ctx_.real(static_cast<long>(o + 1) * (o + 2), 1);
            }
            lifts[o + 2] = lift_row(T[o + 2], keep_, ctx_);
        }

        auto row_l1 = [&](int o) {
            XReal r(ctx_);
            for (int mm = 0; mm < m_; ++mm) r += abs(T[o][mm]);
            return r;
        };
        XReal nO = row_l1(O), nO1 = row_l1(O - 1);
        XReal h = h_cap;
        for (int it = 0;; ++it) {
            XReal tail = nO * pow_si(h, O) + nO1 * pow_si(h, O - 1);
            tail += tail;   // geometric-tail cushion
            if (tail <= tol_ * h) break;
            h = h * ctx_.real(7, 10);
            if (it >= 500) throw StiffnessError("inner taylor: no admissible step size");
        }
        for (int mm = 0; mm < m_; ++mm) {
            XComplex v(ctx_), w(ctx_);
            for (int o = O; o >= 0; --o) {
                if (o >= 1) w = w * h + T[o][mm] * ctx_.real(o, 1);
                v = v * h + T[o][mm];
            }
            state.v.c[mm] = v;
            state.w.c[mm] = w / dir;
        }
        XReal tail = nO * pow_si(h, O) + nO1 * pow_si(h, O - 1);
        err_accum += tail + tail;
        z += dir * h;
        return h;
    }

  private:
    PrecisionContext ctx_;
    int keep_, wide_, m_, order_;
    XReal tol_;
    std::vector<XReal> g_;
};

} // namespace

InnerState integrate_inner(const OddPowerSeries& f, const Contour& contour, const InnerState& seed,
                           const InnerIntegrateOptions& opts) {
    if (contour.waypoints.size() < 2)
        throw ConfigError("integrate_inner: contour needs at least two waypoints");
    PrecisionContext ctx = context_of(seed.phi.v.c.at(0));
    if (abs(contour.waypoints.front() - seed.z) > pow2(ctx, -(ctx.bits() / 2)))
        throw ConfigError("integrate_inner: seed is not at the first waypoint");
    int n_max = seed.phi.v.n_max();
    XReal tol = opts.tol;
    if (tol.is_nan() || tol.is_zero()) tol = pow2(ctx, -(ctx.bits() * 2 / 3));
    int order = opts.taylor_order;
    if (order <= 0) {
        double lg = -mpfr_get_d(log(tol).raw(), MPFR_RNDN) / 2.302585092994046;
        order = std::max(20, static_cast<int>(lg) + 10);
    }
    if (order % 2 == 1) ++order;

    InnerState cur = seed;
    InnerTaylor stepper(f, n_max, ctx, order, tol, opts.amp_hint, opts.trim_floor);
    XReal err_accum(ctx);
    for (size_t leg = 0; leg + 1 < contour.waypoints.size(); ++leg) {
        XComplex a = contour.waypoints[leg], b = contour.waypoints[leg + 1];
        XComplex d = b - a;
        bool horizontal = d.im.is_zero(), vertical = d.re.is_zero();
        if (horizontal == vertical)
            throw ConfigError("integrate_inner: contour segments must be axis-parallel");
        XReal len = horizontal ? abs(d.re) : abs(d.im);
        if (vertical) {
            // hyperbolic amplification e^{mu_nmax len} must fit in the budget
            XReal mu_top = mu_n(ctx, std::max(2, n_max));
            if (mu_top * len > ctx.ln2() * (ctx.bits() / 2))
                throw BudgetError("integrate_inner: vertical leg amplification e^{mu L} exceeds "
                                  "the precision budget");
        }
        XComplex dir = d / len;
        if (opts.fixed_steps > 0) {
            XReal h = len / opts.fixed_steps;
            for (long i = 0; i < opts.fixed_steps; ++i)
                stepper.step(cur.z, cur.phi, dir, h, err_accum);
        } else {
            XReal traveled(ctx);
            long guard = 0;
            while (traveled < len) {
                if (++guard > 100'000'000L) throw StiffnessError("integrate_inner: step explosion");
                XReal cap = len - traveled;
                if (!contour.step_ceiling.is_nan() && !contour.step_ceiling.is_zero())
                    cap = min(cap, contour.step_ceiling);
                traveled += stepper.step(cur.z, cur.phi, dir, cap, err_accum);
            }
        }
        cur.z = b;   // snap (guards accumulated endpoint rounding)
    }
    return cur;
}

namespace {

struct BranchResult {
    PhasePointC phi;
    XReal err;
};

BranchResult run_branch(const OddPowerSeries& f, const FormalModeSeries& series, bool unstable,
                        const XReal& R, const XReal& r0, const PrecisionContext& ctx,
                        const XReal& tol) {
    XComplex z0{unstable ? -R : R, -r0};
    SeedInfo seed = seed_from_series(series, z0, -1, ctx);
    Contour c;
    c.waypoints = {z0, XComplex{ctx.zero(), -r0}};
    c.step_ceiling = ctx.zero();
    InnerIntegrateOptions opts;
    opts.tol = tol;
    opts.amp_hint = ctx.real(6.0) / r0;   // generous l1 cushion over 2 sqrt2/r0
    opts.trim_floor = tol * ctx.real(1, 100);
    InnerState end = integrate_inner(f, c, seed.state, opts);
    return {end.phi, seed.error_estimate + tol * R * 2};
}

} // namespace

StokesEstimate extract_stokes(const OddPowerSeries& f, const XReal& R, const XReal& r0, int n_max,
                              long bits) {
    XReal r0_probe = r0.rounded_to(PrecisionContext(std::max(64L, bits)));
    PrecisionContext probe(std::max(64L, bits));
    long need = required_bits(mu_n(probe, 3) * r0_probe, kDefaultGuardBits);
    if (bits < need)
        throw BudgetError("extract_stokes: bits " + std::to_string(bits) + " below required " +
                          std::to_string(need));
    // the internal repeat at r0' = 1.5 r0 cancels more deeply; escalate if needed
    long need_rp = required_bits(mu_n(probe, 3) * r0_probe * probe.real(3, 2), kDefaultGuardBits);
    PrecisionContext ctx(std::max(bits, need_rp));
    XReal mu3 = mu_n(ctx, 3);
    if (!(R >= r0 + ctx.real(3.0)))
        throw ConfigError("extract_stokes: requires R >= r0 + 3");

    XReal r0p = r0 * ctx.real(3, 2);
    XReal Rp = r0p + (R - r0);
    XReal zbig = hypot(Rp, r0p);
    int Jmax = static_cast<int>(std::min<long>(161, ceil_long(mu3 * zbig) + 11));
    FormalModeSeries series = formal_inner_series(f, n_max, Jmax, ctx);

    StokesEstimate out;
    out.r0 = r0;
    out.r0p = r0p;
    out.R = R;
    out.n_max = n_max;
    out.bits = bits;

    auto measure = [&](const XReal& Ruse, const XReal& ruse, XReal& floor_out, bool& trusted) {
        XReal tol = exp(-(mu3 * ruse)) * ctx.from_string("1e-7");
        BranchResult u = run_branch(f, series, true, Ruse, ruse, ctx, tol);
        BranchResult s = run_branch(f, series, false, Ruse, ruse, ctx, tol);
        int m = (n_max + 1) / 2;
        XReal dl1(ctx);
        for (int mm = 0; mm < m; ++mm) dl1 += abs(u.phi.v.c[mm] - s.phi.v.c[mm]);
        XComplex d3 = u.phi.v.c[1] - s.phi.v.c[1];
        XReal floor_delta = u.err + s.err;
        floor_out = exp(mu3 * ruse) * floor_delta;
        trusted = dl1 >= floor_delta * 10;
        return exp(mu3 * ruse) * d3;
    };

    XReal floor1(ctx), floor2(ctx);
    bool t1 = true, t2 = true;
    out.c_at_r0 = measure(R, r0, floor1, t1);
    out.c_at_r0p = measure(Rp, r0p, floor2, t2);
    out.c_stab = out.c_at_r0p * ctx.real(3.0) - out.c_at_r0 * ctx.real(2.0);
    XReal dc = abs(out.c_at_r0p - out.c_at_r0);
    out.numeric_floor = max(floor1, floor2);
    out.error_bar = dc * 2 + out.numeric_floor * 3;
    out.trusted = t1 && t2;

    out.conjecture_partial = stokes_conjecture_sum(series, series.Jmax, ctx).partial;
    return out;
}

std::vector<XComplex> toy_gamma_series(const std::vector<XComplex>& a, int L,
                                       const PrecisionContext& ctx) {
    std::vector<XComplex> gamma;
    XReal mu3 = mu_n(ctx, 3);
    XReal mu3_2 = mu3 * mu3;
    for (int l = 3; l <= L; ++l) {
        XComplex g(ctx);
        for (int j = 0; 2 * j <= l - 3; ++j) {
            int idx = l - 2 * j - 3;
            if (idx < 0 || idx >= static_cast<int>(a.size())) continue;
            if (a[idx].is_zero()) continue;
            XReal w = factorial(ctx, l - 1) / factorial(ctx, l - 2 * j - 1);
            w /= pow_si(mu3_2, j + 1);
            if (j % 2 == 1) w.negate();
            g += a[idx] * w;
        }
        gamma.push_back(g);
    }
    return gamma;
}

XComplex toy_splitting_closed_form(const std::vector<XComplex>& a, const XReal& kappa,
                                   const PrecisionContext& ctx) {
    XReal mu3 = mu_n(ctx, 3);
    XComplex sum(ctx);
    XReal prev_mag(ctx);
    bool grew_late = false;
    for (size_t idx = 0; idx < a.size(); ++idx) {
        int l = static_cast<int>(idx) + 3;
        if (a[idx].is_zero()) continue;
        XComplex term = a[idx] * (pow_si(mu3, l - 2) / factorial(ctx, l - 1));
        term = times_i_pow(term, l - 1);
        sum += term;
        XReal mag = abs(term);
        if (idx + 8 >= a.size() && !prev_mag.is_zero() && mag > prev_mag * 4) grew_late = true;
        prev_mag = mag;
    }
    if (grew_late)
        throw ConvergenceError("toy_splitting_closed_form: tail terms are not decaying");
    return sum * (-(ctx.pi() * exp(-(mu3 * kappa))));
}

XComplex toy_splitting_numeric(const std::vector<XComplex>& a, const XReal& kappa, const XReal& R,
                               const PrecisionContext& ctx, const XReal& tol) {
    if (!(R > kappa * 2)) throw ConfigError("toy_splitting_numeric: needs R >> kappa");
    XReal mu3 = mu_n(ctx, 3);
    XReal mu3_2 = mu3 * mu3;
    int L = static_cast<int>(std::min<long>(160, floor_long(mu3 * R)));
    std::vector<XComplex> gamma = toy_gamma_series(a, L, ctx);

    auto g_rhs = [&](const XComplex& z) {
        XComplex inv = XComplex{ctx.real(1.0), ctx.zero()} / z;
        XComplex zp = inv * inv * inv;
        XComplex val(ctx);
        for (size_t idx = 0; idx < a.size(); ++idx) {
            if (!a[idx].is_zero()) val += a[idx] * zp;
            zp = zp * inv;
        }
        return val;
    };

    auto run = [&](bool unstable) {
        XComplex z0{unstable ? -R : R, -kappa};
        XComplex inv = XComplex{ctx.real(1.0), ctx.zero()} / z0;
        XReal ainv = abs(inv);
        int best = 3;
        {
            XReal bm(ctx);
            XReal p = pow_si(ainv, 3);
            bool first = true;
            for (int l = 3; l <= L; ++l) {
                XReal mag = abs(gamma[l - 3]) * p;
                p *= ainv;
                if (mag.is_zero()) continue;
                if (first || mag < bm) {
                    bm = mag;
                    best = l;
                    first = false;
                }
            }
        }
        XComplex val(ctx), dval(ctx);
        XComplex zp = inv * inv * inv;
        for (int l = 3; l <= best; ++l) {
            val += gamma[l - 3] * zp;
            dval += gamma[l - 3] * zp * inv * ctx.real(-l, 1);
            zp = zp * inv;
        }
        XComplex dir{unstable ? ctx.real(1.0) : ctx.real(-1.0), ctx.zero()};
        auto rhs = [&, z0, dir](const XReal& t, const std::vector<XComplex>& y,
                                std::vector<XComplex>& dy) {
            XComplex z = z0 + dir * t;
            dy[0] = y[1] * dir;
            dy[1] = (g_rhs(z) - y[0] * mu3_2) * dir;
        };
        Rkf78<XComplex> rk(ctx, 2, rhs);
        rk.set_tol(tol);
        rk.set_state(ctx.zero(), {val, dval});
        rk.integrate_to(R);
        return rk.state()[0];
    };

    return run(true) - run(false);
}

ConjectureSums stokes_conjecture_sum(const FormalModeSeries& series, int L,
                                     const PrecisionContext& ctx) {
    ConjectureSums out;
    if (series.mode_count() < 2) return out;
    XReal mu3 = mu_n(ctx, 3);
    XComplex sum(ctx);
    XReal prev_inc(ctx);
    for (int l = 3; l <= std::min(L, series.Jmax); l += 2) {
        const XComplex& beta = series.beta[l - 1][0];
        XComplex term = beta * (pow_si(mu3, l - 2) / factorial(ctx, l - 1));
        term = times_i_pow(term, l - 1);
        term = term * (-(ctx.pi()));
        sum += term;
        out.partial.push_back(sum);
        XReal inc = abs(term);
        if (!prev_inc.is_zero()) out.increment_ratio.push_back(inc / prev_inc);
        prev_inc = inc;
    }
    return out;
}

} // namespace kgsplit
