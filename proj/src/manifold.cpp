#include "kgsplit/manifold.hpp"

#include <algorithm>
#include <chrono>
#include <future>

namespace kgsplit {

namespace {

// Polynomials in E = e^y with lifted-mode-array coefficients: poly[q] is the
// signed exponential lift (band `band`) of the order-q series.
using EPoly = std::vector<std::vector<XReal>>;

EPoly epoly_mul(const EPoly& A, const EPoly& B, int band_a, int band_b, int band_out, int P,
                const PrecisionContext& ctx) {
    EPoly out(P + 1, std::vector<XReal>(2 * band_out + 1, ctx.zero()));
    for (int qa = 0; qa <= P; ++qa) {
        for (int qb = 0; qa + qb <= P; ++qb) {
            if (qb >= static_cast<int>(B.size()) || qa >= static_cast<int>(A.size())) continue;
            const auto& a = A[qa];
            const auto& b = B[qb];
            auto& o = out[qa + qb];
            for (int ia = 0; ia < 2 * band_a + 1; ++ia) {
                if (a[ia].is_zero()) continue;
                int na = ia - band_a;
                for (int ib = 0; ib < 2 * band_b + 1; ++ib) {
                    if (b[ib].is_zero()) continue;
                    int n = na + (ib - band_b);
                    if (n < -band_out || n > band_out) continue;
                    o[n + band_out].add_mul(a[ia], b[ib]);
                }
            }
        }
    }
    return out;
}

} // namespace

ManifoldExpansion expand_unstable_manifold(const ModelParams& p, int P, const XReal& delta) {
    PrecisionContext ctx = p.ctx();
    if (P < 1) throw ConfigError("expand_unstable_manifold: P must be >= 1");
    if (!(delta > ctx.zero())) throw ConfigError("expand_unstable_manifold: delta must be positive");
    const int m = p.mode_count();
    const int keep = p.n_max;          // reduced band
    const int wide = 3 * keep;
    GalerkinField field(p);
    OddPowerSeries g = p.g_series();
    XReal scale = p.amplitude_scale();
    XReal inv_scale3 = ctx.real(1.0) / (scale * scale * scale);

    ManifoldExpansion ex;
    ex.P = P;
    ex.delta = delta;
    ex.stride = p.k;
    ex.mode_count = m;
    ex.coeff.assign(P, std::vector<XReal>(m, ctx.zero()));
    ex.coeff[0][0] = delta;

    XReal resonance_floor = pow2(ctx, -(ctx.bits() / 2));

    for (int order = 2; order <= P; ++order) {
        // lifted representation of scale*v with coefficients known so far
        EPoly V(order, std::vector<XReal>(2 * keep + 1, ctx.zero()));
        for (int q = 1; q < order; ++q) {
            for (int j = 0; j < m; ++j) {
                int n = 2 * j + 1;
                if (n > keep) break;
                XReal val = ex.coeff[q - 1][j] * scale;
                V[q][keep + n] = val;
                V[q][keep - n] = -val;
            }
        }
        // (scale v)^2 then odd powers, keeping E-degree <= order
        EPoly SQ = epoly_mul(V, V, keep, keep, 2 * keep, order, ctx);
        EPoly PW = V;
        int band_pw = keep;
        std::vector<XReal> G_order(m, ctx.zero());   // order-`order` coefficient of G per mode
        XReal factor = ctx.real(1.0);
        const XReal minus_quarter = ctx.real(-1, 4);
        for (int d = 1; d <= g.terms(); ++d) {
            EPoly PWn = epoly_mul(PW, SQ, band_pw, 2 * keep, wide, order, ctx);
            factor *= minus_quarter;
            if (!g.c[d - 1].is_zero()) {
                XReal w = g.c[d - 1] * factor * inv_scale3;
                for (int j = 0; j < m; ++j) {
                    int n = 2 * j + 1;
                    if (n <= wide) G_order[j].add_mul(PWn[order][wide + n], w);
                }
            }
            // truncate back to the kept band for the next power
            if (d < g.terms()) {
                PW.assign(order + 1, std::vector<XReal>(2 * keep + 1, ctx.zero()));
                for (int q = 0; q <= order; ++q)
                    for (int n = -keep; n <= keep; ++n) PW[q][n + keep] = PWn[q][n + wide];
                band_pw = keep;
            }
        }
        // (order^2 - A_j) c_{order,j} = -G_{order,j}
        XReal ord2 = ctx.real(static_cast<long>(order) * order, 1);
        for (int j = 0; j < m; ++j) {
            XReal div = ord2 - field.accel_coeff(j);
            if (abs(div) < resonance_floor)
                throw ResonanceError("expand_unstable_manifold: vanishing divisor at order " +
                                     std::to_string(order));
            ex.coeff[order - 1][j] = -G_order[j] / div;
        }
    }
    return ex;
}

PhasePoint ManifoldExpansion::eval(const PrecisionContext& ctx, const XReal& y) const {
    PhasePoint s{OddSeries<XReal>(ctx, stride, mode_count), OddSeries<XReal>(ctx, stride, mode_count)};
    XReal E = exp(y);
    XReal Ep = ctx.real(1.0);
    for (int p = 1; p <= P; ++p) {
        Ep *= E;
        for (int j = 0; j < mode_count; ++j) {
            if (coeff[p - 1][j].is_zero()) continue;
            XReal t = coeff[p - 1][j] * Ep;
            s.v.c[j] += t;
            s.w.c[j].add_mul(t, ctx.real(p, 1));
        }
    }
    return s;
}

XReal ManifoldExpansion::residual_l1(const ModelParams& p, const XReal& y) const {
    PrecisionContext ctx = p.ctx();
    PhasePoint s = eval(ctx, y);
    PhasePoint rhs = vector_field(p, s);
    // d^2/dy^2 v = sum p^2 c_p e^{p y}
    XReal E = exp(y);
    XReal Ep = ctx.real(1.0);
    OddSeries<XReal> acc(ctx, stride, mode_count);
    for (int q = 1; q <= P; ++q) {
        Ep *= E;
        for (int j = 0; j < mode_count; ++j)
            acc.c[j].add_mul(coeff[q - 1][j] * Ep, ctx.real(static_cast<long>(q) * q, 1));
    }
    XReal r(ctx);
    for (int j = 0; j < mode_count; ++j) r += abs(acc.c[j] - rhs.w.c[j]);
    return r;
}

namespace {

struct FlatField {
    GalerkinField field;
    explicit FlatField(const ModelParams& p) : field(p) {}
    void operator()(const XReal&, const std::vector<XReal>& y, std::vector<XReal>& dy) const {
        field.eval(y, dy);
    }
};

XReal stiffness_h_max(const ModelParams& p) {
    PrecisionContext ctx = p.ctx();
    int n_top = p.k * p.n_max;
    if (p.n_max == 1) return ctx.real(1, 10);   // Duffing reduction: no fast modes
    XReal l = lambda_n(p, n_top);
    return ctx.real(1, 10) * p.eps / l;
}

} // namespace

Orbit integrate_orbit(const ModelParams& p, const PhasePoint& start, const XReal& y0, const XReal& y1,
                      const XReal& tol, const std::vector<XReal>& capture_at) {
    PrecisionContext ctx = p.ctx();
    int m = p.mode_count();
    Rkf78<XReal> rk(ctx, 2 * m, FlatField(p));
    rk.set_tol(tol);
    rk.set_h_limits(pow2(ctx, -(ctx.bits() - 8)), stiffness_h_max(p));
    rk.set_state(y0, flatten(start));

    Orbit orbit;
    XReal H0 = hamiltonian(p, start);
    orbit.samples.push_back({y0, start});

    // walk through the capture grid by clamping integration targets
    std::vector<XReal> targets = capture_at;
    int dir = (y1 > y0) ? 1 : -1;
    std::sort(targets.begin(), targets.end(),
              [&](const XReal& a, const XReal& b) { return dir > 0 ? a < b : a > b; });
    for (const XReal& t : targets) {
        if ((dir > 0 && (t < y0 || t > y1)) || (dir < 0 && (t > y0 || t < y1)))
            throw ConfigError("integrate_orbit: capture point outside the integration span");
        rk.integrate_to(t);
        orbit.samples.push_back({t, unflatten(ctx, p.k, m, rk.state())});
    }
    rk.integrate_to(y1);
    orbit.samples.push_back({y1, unflatten(ctx, p.k, m, rk.state())});
    orbit.energy_drift = abs(hamiltonian(p, orbit.samples.back().state) - H0);
    orbit.accepted_steps = rk.accepted_steps();
    orbit.rejected_steps = rk.rejected_steps();
    return orbit;
}

SectionHit find_symmetric_section(const ModelParams& p, const PhasePoint& start, const XReal& y0,
                                  const XReal& y_limit, const XReal& tol) {
    PrecisionContext ctx = p.ctx();
    const int m = p.mode_count();
    Rkf78<XReal> rk(ctx, 2 * m, FlatField(p));
    rk.set_tol(tol);
    rk.set_h_limits(pow2(ctx, -(ctx.bits() - 8)), stiffness_h_max(p));
    rk.set_state(y0, flatten(start));

    // Primary-bump gate: only accept crossings with v_k above half the
    // Duffing apex 2 sqrt2.
    XReal gate = ctx.sqrt2();
    bool found = false;
    XReal prev_w = rk.state()[m];
    rk.integrate_to(y_limit, [&](const XReal&, const XReal&, const Rkf78<XReal>& self) {
        const XReal& w_now = self.state()[m];
        if (prev_w.sign() > 0 && w_now.sign() <= 0 && self.state()[0] > gate) {
            found = true;
            return false;
        }
        prev_w = w_now;
        return true;
    });
    if (!found) throw SectionError("find_symmetric_section: no section crossing before the y limit");

    // secant with bisection fallback on the dense output of the final step
    XReal a = rk.t_prev(), b = rk.t();
    XReal fa = rk.state_prev()[m], fb = rk.state()[m];
    XReal y_star = b;
    std::vector<XReal> s_star = rk.state();
    for (int it = 0; it < 300 && abs(s_star[m]) > tol; ++it) {
        XReal denom = fb - fa;
        XReal mid = denom.is_zero() ? (a + b) / 2 : b - fb * (b - a) / denom;
        if (!(mid > min(a, b) && mid < max(a, b))) mid = (a + b) / 2;
        std::vector<XReal> sm = rk.eval_within_last_step(mid);
        XReal fm = sm[m];
        y_star = mid;
        s_star = std::move(sm);
        if ((fm.sign() > 0) == (fa.sign() > 0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    if (abs(s_star[m]) > tol * 16)
        throw SectionError("find_symmetric_section: root refinement stalled");
    SectionHit hit{y_star, unflatten(ctx, p.k, m, s_star), rk.accepted_steps(), rk.rejected_steps()};
    hit.state.w.c[0].set_zero();   // place the state exactly on Sigma
    return hit;
}

XReal expected_splitting_scale(const ModelParams& p) {
    PrecisionContext ctx = p.ctx();
    XReal rate = ctx.pi() * sqrt(ctx.real(2 * p.k, 1));
    return ctx.real(4.0) * ctx.sqrt2() / p.eps * exp(-(rate / p.eps));
}

long auto_bits(int k, const XReal& eps) {
    PrecisionContext ctx(std::max(eps.prec(), 64L));
    XReal nats = ctx.pi() * sqrt(ctx.real(2 * k, 1)) / eps;
    return required_bits(nats, kDefaultGuardBits);
}

XReal auto_seed_Y(const ModelParams& p, int P, const XReal& delta) {
    PrecisionContext ctx = p.ctx();
    // residual budget: (delta e^{-Y})^{P+1} <= 1e-3 * expected splitting
    XReal s = expected_splitting_scale(p);
    XReal need = (log(delta) - (log(s) + log(ctx.real(1, 1000))) / (P + 1));
    XReal floor1 = ctx.real(6.0);
    XReal floor2 = log(delta) + ctx.real(3.0);
    return max(max(need, floor1), floor2);
}

XReal auto_tolerance(const ModelParams& p) {
    PrecisionContext ctx = p.ctx();
    // resolve the mode-3k velocity w = s_eps/(2 eps) to ~1e-4 relative,
    // allowing for e^{Y}-type amplification along the orbit
    XReal w_target = expected_splitting_scale(p) / (p.eps * 2);
    XReal amp = exp(auto_seed_Y(p, 8, ctx.real(4.0) * ctx.sqrt2()) + ctx.real(2.0));
    return w_target * ctx.real(1, 10000) / amp;
}

SplittingSample measure_splitting(const ModelParams& p, int P, const XReal& delta, const XReal& Y_in,
                                  const XReal& tol, const MeasureOptions& opts) {
    auto t_start = std::chrono::steady_clock::now();
    PrecisionContext ctx = p.ctx();
    if (p.bits < auto_bits(p.k, p.eps))
        throw BudgetError("measure_splitting: bits " + std::to_string(p.bits) + " below required " +
                          std::to_string(auto_bits(p.k, p.eps)));

    XReal Y = (Y_in > ctx.zero()) ? Y_in : auto_seed_Y(p, P, delta);
    ManifoldExpansion ex = expand_unstable_manifold(p, P, delta);
    PhasePoint seed = ex.eval(ctx, -Y);
    XReal H0 = hamiltonian(p, seed);

    // spread the local-error budget over the whole span so the global energy
    // drift stays below 10 tol
    XReal span = Y + log(ctx.real(4.0) * ctx.sqrt2() / delta) + ctx.real(6.0);
    XReal tol_int = tol / max(ctx.real(1.0), span);

    // the apex sits near y ~ ln(4 sqrt2/delta); allow generous slack
    XReal y_limit = log(ctx.real(4.0) * ctx.sqrt2() / delta) + ctx.real(6.0);
    SectionHit hit = find_symmetric_section(p, seed, -Y, y_limit, tol_int);

    SplittingSample out;
    out.eps = p.eps;
    out.k = p.k;
    out.section_y = hit.y_star;
    out.n_max = p.n_max;
    out.bits_used = p.bits;
    out.seed_Y = Y;
    out.seed_delta = delta;
    out.steps = hit.accepted_steps;
    out.section_state = hit.state;

    const int m = p.mode_count();
    out.Gamma.assign(m, XComplex(ctx));
    out.Theta.assign(m, XComplex(ctx));
    XReal two_eps = p.eps * 2;
    for (int j = 1; j < m; ++j) {
        // Gamma_n(0) = i eps Xi_n(0) = 2 i eps w_n(0)
        out.Gamma[j] = XComplex{ctx.zero(), two_eps * hit.state.w.c[j]};
        out.Theta[j] = -out.Gamma[j];
    }
    out.s_eps = m > 1 ? abs(out.Gamma[1]) : ctx.zero();

    out.energy_drift = abs(hamiltonian(p, hit.state) - H0);
    XReal drift_budget = out.s_eps * ctx.real(1, 100);
    out.trusted = (m <= 1) || out.energy_drift <= drift_budget;

    if (opts.cross_check) {
        // The stable orbit is seeded at +Y by the reflected expansion state
        // (v, -w) and integrated backwards; reversibility predicts
        // v^s(-y) = v^u(y), w^s(-y) = -w^u(y) componentwise.
        PhasePoint sseed = seed;
        for (auto& x : sseed.w.c) x.negate();
        int npts = std::max(2, opts.cross_check_points);
        std::vector<XReal> ys;
        for (int i = 1; i <= npts; ++i) ys.push_back(-Y + (hit.y_star + Y) * i / (npts + 1));
        Orbit u_orbit = integrate_orbit(p, seed, -Y, hit.y_star, tol_int, ys);
        std::vector<XReal> ys_ref;
        for (const auto& y : ys) ys_ref.push_back(-y);
        Orbit s_orbit = integrate_orbit(p, sseed, Y, -hit.y_star, tol_int, ys_ref);
        XReal defect(ctx);
        for (int i = 0; i < npts; ++i) {
            const PhasePoint& uu = u_orbit.samples[1 + i].state;       // at ys[i]
            const PhasePoint& ss = s_orbit.samples[1 + i].state;       // at -ys[i]
            for (int j = 0; j < m; ++j) {
                defect = max(defect, abs(ss.v.c[j] - uu.v.c[j]));
                defect = max(defect, abs(ss.w.c[j] + uu.w.c[j]));
            }
        }
        out.reversibility_defect = defect;
    }

    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

ScanResult scan_and_fit(const ScanSpec& spec, const std::vector<XReal>& eps_grid, int jobs) {
    if (eps_grid.empty()) throw ConfigError("scan_and_fit: empty eps grid");
    auto run_one = [&](const XReal& eps) {
        long bits = spec.bits > 0 ? spec.bits : auto_bits(spec.k, eps);
        PrecisionContext ctx(bits);
        ModelParams p = make_model(spec.k, eps.rounded_to(ctx), spec.f_raw, spec.mu, spec.n_max, bits);
        XReal delta = ctx.real(4.0) * ctx.sqrt2();
        XReal tol = (!spec.tol.is_nan() && !spec.tol.is_zero()) ? spec.tol.rounded_to(ctx)
                                                                : auto_tolerance(p);
        return measure_splitting(p, spec.order_P, delta, ctx.zero(), tol);
    };

    std::vector<SplittingSample> samples(eps_grid.size());
    if (jobs <= 1) {
        for (size_t i = 0; i < eps_grid.size(); ++i) samples[i] = run_one(eps_grid[i]);
    } else {
        std::vector<std::future<SplittingSample>> futs;
        futs.reserve(eps_grid.size());
        for (const auto& e : eps_grid)
            futs.push_back(std::async(std::launch::async, run_one, e));
        for (size_t i = 0; i < futs.size(); ++i) samples[i] = futs[i].get();
    }
    for (const auto& s : samples)
        if (!s.trusted)
            throw PrecisionError("scan_and_fit: untrusted sample at eps = " + s.eps.to_string(8));

    ScanResult res;
    res.samples = samples;
    PrecisionContext ctx(256);

    std::vector<std::pair<XReal, XReal>> pts;
    for (const auto& s : samples) pts.emplace_back(s.eps.rounded_to(ctx), s.s_eps.rounded_to(ctx));
    for (size_t i = 2; i <= samples.size(); ++i) {
        std::vector<std::pair<XReal, XReal>> head(pts.begin(), pts.begin() + i);
        res.rate_running.push_back(fit_splitting_law(head, ctx).first);
    }
    if (samples.size() >= 2) {
        auto [B, A] = fit_splitting_law(pts, ctx);
        res.rate_B = B;
        res.intercept_A = A;
    } else {
        res.rate_B = XReal(ctx);
        res.intercept_A = XReal(ctx);
    }

    XReal B0 = ctx.pi() * sqrt(ctx.real(2 * spec.k, 1));
    XReal four_sqrt2 = ctx.real(4.0) * ctx.sqrt2();
    for (const auto& s : samples) {
        XReal e = s.eps.rounded_to(ctx);
        res.prefactor.push_back(e * exp(B0 / e) * s.s_eps.rounded_to(ctx) / four_sqrt2);
    }
    return res;
}

std::pair<XReal, XReal> fit_splitting_law(const std::vector<std::pair<XReal, XReal>>& eps_s,
                                          const PrecisionContext& ctx) {
    if (eps_s.size() < 2) throw ConfigError("fit_splitting_law: need at least two points");
    XReal sx(ctx), sy(ctx), sxx(ctx), sxy(ctx);
    for (const auto& [eps, s] : eps_s) {
        XReal x = ctx.real(1.0) / eps.rounded_to(ctx);
        XReal y = log(s.rounded_to(ctx)) + log(eps.rounded_to(ctx));
        sx += x;
        sy += y;
        sxx.add_mul(x, x);
        sxy.add_mul(x, y);
    }
    XReal n = ctx.real(static_cast<long>(eps_s.size()), 1);
    XReal denom = n * sxx - sx * sx;
    XReal slope = (n * sxy - sx * sy) / denom;
    XReal A = (sy - slope * sx) / n;
    return {-slope, A};
}

OuterRatioReport check_outer_estimate(const ModelParams& p, const Orbit& traj) {
    PrecisionContext ctx = p.ctx();
    OuterRatioReport rep;
    if (p.eps.is_zero()) return rep;
    XReal eps_tilde_sq = p.eps * p.eps / ctx.real(p.k, 1);
    XReal lo = ctx.real(-3.0), hi = ctx.zero();
    for (const auto& smp : traj.samples) {
        if (smp.y < lo || smp.y > hi) continue;
        auto [vh, dvh] = duffing_homoclinic(XComplex{smp.y, ctx.zero()});
        XReal vhr = vh.re;
        XReal diff(ctx);
        for (int j = 0; j < smp.state.v.count(); ++j) {
            XReal d = smp.state.v.c[j];
            if (j == 0) d -= vhr;
            diff += abs(d);
        }
        XReal r = diff / (eps_tilde_sq * vhr);
        rep.samples.emplace_back(smp.y, r);
        if (rep.empty || r > rep.sup_ratio) rep.sup_ratio = r;
        rep.empty = false;
    }
    return rep;
}

} // namespace kgsplit
