#include "kgsplit/acceptance.hpp"

#include <chrono>
#include <thread>

#include "kgsplit/inner.hpp"
#include "kgsplit/manifold.hpp"
#include "kgsplit/melnikov.hpp"
#include "kgsplit/scanio.hpp"

namespace kgsplit::accept {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const XReal& x, int digits = 8) { return x.to_string(digits); }

template <class Fn>
CriterionResult guarded(const std::string& id, Fn&& fn) {
    auto t0 = Clock::now();
    CriterionResult r;
    r.id = id;
    try {
        fn(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = since(t0);
    return r;
}

} // namespace

CriterionResult run_toy_oracle(Scale scale) {
    return guarded("A1 toy-model oracle", [&](CriterionResult& r) {
        PrecisionContext ctx(256);
        std::vector<XComplex> a{XComplex{ctx.real(1.0), ctx.zero()}};
        std::vector<double> kappas = scale == Scale::Full ? std::vector<double>{5, 7, 10}
                                                          : std::vector<double>{5};
        bool ok = true;
        std::string det;
        for (double kv : kappas) {
            XReal kappa = ctx.real(kv);
            XComplex closed = toy_splitting_closed_form(a, kappa, ctx);
            XComplex numeric =
                toy_splitting_numeric(a, kappa, ctx.real(25.0), ctx, ctx.from_string("1e-20"));
            XReal rel = abs(numeric - closed) / abs(closed);
            ok = ok && rel <= ctx.from_string("1e-6");
            det += "kappa=" + fmt(kappa, 3) + " rel=" + fmt(rel, 3) + "  ";
        }
        r.pass = ok;
        r.detail = det + "(tolerance 1e-6)";
    });
}

CriterionResult run_melnikov_cross_oracle(Scale scale) {
    return guarded("A2 Melnikov cross-oracle", [&](CriterionResult& r) {
        PrecisionContext ctx(256);
        MelnikovGrid grid;
        grid.n_tau = scale == Scale::Full ? 64 : 48;
        XReal S_cut = scale == Scale::Full ? ctx.real(60.0) : ctx.real(25.0);
        int Q = scale == Scale::Full ? 18 : 12;

        std::vector<OddPowerSeries> fs(1);
        if (scale == Scale::Full) {
            OddPowerSeries fu5;
            fu5.c = {ctx.zero(), ctx.real(1.0)};
            fs.push_back(fu5);
        }
        bool ok = true;
        std::string det;
        for (const auto& f : fs) {
            XComplex series_val = c_in_prime(f, Q, ctx);
            QuadratureResult q3 = melnikov_quadrature(f, ctx.real(3.0), S_cut, grid, ctx);
            QuadratureResult q6 = melnikov_quadrature(f, ctx.real(6.0), S_cut, grid, ctx);
            XReal rel = abs(q3.value - series_val) / abs(series_val);
            XReal zi = abs(q3.value - q6.value) / abs(q3.value);
            XReal zi_tol = ctx.from_string("1e-5") + (q3.tail_bound + q6.tail_bound) / abs(q3.value);
            ok = ok && rel <= ctx.from_string("1e-4") && zi <= zi_tol;
            det += "agree_rel=" + fmt(rel, 3) + " z_indep=" + fmt(zi, 3) + "  ";
        }
        r.pass = ok;
        r.detail = det + "(tolerance 1e-4)";
    });
}

CriterionResult run_stokes_stability(Scale scale) {
    return guarded("A3 inner Stokes stability", [&](CriterionResult& r) {
        bool full = scale == Scale::Full;
        PrecisionContext ctx(256);
        // the truncated sine-Gordon system has a truncation-induced Stokes
        // constant (~1e-4 at n_max=5, ~1e-9 at n_max=11), so even the quick
        // variant needs a reasonable mode count
        int n_max = full ? 11 : 9;
        XReal r0a = full ? ctx.real(12.0) : ctx.real(9.0);
        XReal Ra = full ? ctx.real(20.0) : ctx.real(14.0);
        XReal r0b = full ? ctx.real(18.0) : ctx.real(12.0);
        XReal Rb = full ? ctx.real(26.0) : ctx.real(17.0);
        XReal tol_rel = full ? ctx.from_string("0.10") : ctx.from_string("0.25");

        OddPowerSeries f;   // cubic Klein-Gordon
        long bits_a = required_bits(mu_n(ctx, 3) * r0a, kDefaultGuardBits);
        long bits_b = required_bits(mu_n(ctx, 3) * r0b, kDefaultGuardBits);
        StokesEstimate ea = extract_stokes(f, Ra, r0a, n_max, bits_a);
        StokesEstimate eb = extract_stokes(f, Rb, r0b, n_max, bits_b);
        XReal rel = abs(ea.c_stab - eb.c_stab) / abs(eb.c_stab);
        bool ok = rel <= tol_rel && ea.trusted && eb.trusted;

        // mu = 0 family is sine-Gordon: the estimate must sit inside its bar
        OddPowerSeries f_sg = appendix_c_family(ctx.zero(), OddPowerSeries{}, 15);
        StokesEstimate esg = extract_stokes(f_sg, Ra, r0a, n_max, bits_a);
        bool sg_ok = abs(esg.c_stab) <= esg.error_bar;
        ok = ok && sg_ok;

        r.pass = ok;
        r.detail = "C(" + fmt(r0a, 3) + ")=" + fmt(abs(ea.c_stab), 6) + " C(" + fmt(r0b, 3) +
                   ")=" + fmt(abs(eb.c_stab), 6) + " rel=" + fmt(rel, 3) +
                   " | sine-Gordon |C|=" + fmt(abs(esg.c_stab), 3) + " bar=" +
                   fmt(esg.error_bar, 3) + (sg_ok ? " (inside bar)" : " (OUTSIDE bar)");
    });
}

CriterionResult run_splitting_law(Scale scale) {
    return guarded("A4 splitting exponent law", [&](CriterionResult& r) {
        bool full = scale == Scale::Full;
        PrecisionContext ctx(256);
        ScanSpec spec;
        spec.k = 1;
        spec.n_max = full ? 11 : 7;
        spec.order_P = 8;
        std::vector<XReal> grid;
        if (full)
            for (const char* e : {"0.40", "0.34", "0.29", "0.25", "0.21", "0.18"})
                grid.push_back(ctx.from_string(e));
        else
            for (const char* e : {"0.40", "0.33", "0.27"}) grid.push_back(ctx.from_string(e));

        int jobs = static_cast<int>(std::min<unsigned>(grid.size(),
                                                       std::thread::hardware_concurrency()));
        ScanResult scan = scan_and_fit(spec, grid, std::max(1, jobs));
        XReal B0 = ctx.pi() * ctx.sqrt2();
        XReal rate_rel = abs(scan.rate_B.rounded_to(ctx) - B0) / B0;
        XReal rate_tol = full ? ctx.from_string("0.02") : ctx.from_string("0.06");
        bool ok = rate_rel <= rate_tol;
        std::string det = "B=" + fmt(scan.rate_B, 8) + " (pi sqrt2=" + fmt(B0, 8) +
                          ", rel=" + fmt(rate_rel, 3) + ")";

        // prefactor estimates: successive relative changes shrink with eps
        std::vector<XReal> changes;
        for (size_t i = 0; i + 1 < scan.prefactor.size(); ++i) {
            XReal c = abs(scan.prefactor[i + 1] - scan.prefactor[i]) / abs(scan.prefactor[i]);
            changes.push_back(c);
        }
        bool trend = changes.size() >= 2;
        for (size_t i = 0; i + 1 < changes.size(); ++i)
            trend = trend && changes[i + 1] <= changes[i] * ctx.from_string("1.25");
        if (!changes.empty()) trend = trend && changes.back() < changes.front();
        ok = ok && trend;
        det += " | prefactor changes:";
        for (const auto& c : changes) det += " " + fmt(c, 3);
        det += trend ? " (shrinking)" : " (NOT shrinking)";
        r.pass = ok;
        r.detail = det;
    });
}

CriterionResult run_perturbative_consistency(Scale scale) {
    return guarded("A5 perturbative consistency", [&](CriterionResult& r) {
        bool full = scale == Scale::Full;
        PrecisionContext ctx(256);
        XReal mu = ctx.from_string("0.05");
        OddPowerSeries f_mu = appendix_c_family(mu, OddPowerSeries{}, 15);
        int n_max = full ? 11 : 5;
        XReal r0 = full ? ctx.real(12.0) : ctx.real(8.0);
        XReal R = full ? ctx.real(20.0) : ctx.real(12.0);
        long bits = required_bits(mu_n(ctx, 3) * r0, kDefaultGuardBits);
        StokesEstimate est = extract_stokes(f_mu, R, r0, n_max, bits);

        XComplex cprime = c_in_prime(OddPowerSeries{}, 18, ctx);
        XComplex target = cprime * mu;
        // |C_in| is what enters the splitting law; compare magnitudes and
        // check the extraction's phase against the Borel-sum partial sums
        XReal rel = abs(abs(est.c_stab) - abs(target)) / abs(target);
        XReal tol = full ? ctx.from_string("0.15") : ctx.from_string("0.30");
        bool phase_ok = !est.conjecture_partial.empty() &&
                        est.conjecture_partial.back().im.sign() == est.c_stab.im.sign();
        r.pass = rel <= tol && est.trusted && phase_ok;
        r.detail = "|C_in(mu)|=" + fmt(abs(est.c_stab), 6) + " |mu*C'(0)|=" + fmt(abs(target), 6) +
                   " rel=" + fmt(rel, 3) + " (tolerance " + fmt(tol, 2) + ")" +
                   (phase_ok ? " phase consistent with Borel sums" : " PHASE MISMATCH");
    });
}

CriterionResult run_invariant_suite(Scale scale) {
    return guarded("A6 invariant suite", [&](CriterionResult& r) {
        bool full = scale == Scale::Full;
        std::string det;
        bool ok = true;

        // (a) energy drift and (c) reversibility on a measured orbit
        {
            long bits = auto_bits(1, PrecisionContext(128).from_string("0.3"));
            PrecisionContext ctx(bits);
            ModelParams p = make_model(1, ctx.from_string("0.3"), OddPowerSeries{}, std::nullopt,
                                       full ? 11 : 7, bits);
            XReal tol = auto_tolerance(p);
            MeasureOptions opts;
            opts.cross_check = true;
            SplittingSample s =
                measure_splitting(p, 8, ctx.real(4.0) * ctx.sqrt2(), ctx.zero(), tol, opts);
            bool drift_ok = s.energy_drift <= tol * 10;
            bool rev_ok = s.reversibility_defect && *s.reversibility_defect <= tol * 10;
            ok = ok && drift_ok && rev_ok && s.trusted;
            det += "drift/tol=" + fmt(s.energy_drift / tol, 3) +
                   " rev/tol=" + fmt(*s.reversibility_defect / tol, 3);

            // (b) parity: even-mode content of g on the section state is zero
            int band = 0;
            std::vector<XReal> table =
                compose_full_exponential(p.g_series(), s.section_state.v, p.amplitude_scale(), &band);
            XReal even_mass(ctx);
            for (int n = -band; n <= band; ++n)
                if (n % 2 == 0) even_mass += abs(table[n + band]);
            bool parity_ok = even_mass <= pow2(ctx, -(bits / 2));
            ok = ok && parity_ok;
            det += " parity=" + fmt(even_mass, 3);
        }

        // (d) Duffing residual at 100 scattered complex points
        {
            PrecisionContext ctx(192);
            int checked = 0;
            bool res_ok = true;
            long seed = 42;
            for (int t = 0; t < 400 && checked < 100; ++t) {
                seed = (seed * 1103515245 + 12345) % 2147483648L;
                XReal yr = ctx.real(seed % 600 - 300, 100);
                seed = (seed * 1103515245 + 12345) % 2147483648L;
                XReal yi = ctx.real(seed % 250, 100);
                XComplex ch{cosh(yr) * cos(yi), sinh(yr) * sin(yi)};
                if (abs(ch) < ctx.real(1, 4)) continue;
                ++checked;
                auto [v, dv] = duffing_homoclinic(XComplex{yr, yi});
                XComplex v2 = v * v;
                XComplex resid = dv * dv - (v2 - v2 * v2 * ctx.real(1, 8));
                XReal scale_m = max(ctx.real(1.0), norm2(v) * norm2(v));
                res_ok = res_ok && abs(resid) <= scale_m * pow2(ctx, -(ctx.bits() - 8));
            }
            ok = ok && res_ok && checked == 100;
            det += res_ok ? " duffing-residual ok" : " duffing-residual FAIL";
        }

        // (e) k-rescaling round trip
        {
            PrecisionContext ctx(192);
            ModelParams p2 = make_model(2, ctx.from_string("0.2"), OddPowerSeries{}, std::nullopt,
                                        11, 192);
            std::vector<OrbitSample> traj;
            for (int i = -2; i <= 2; ++i) {
                OrbitSample smp{ctx.real(i, 2),
                                PhasePoint{RealOddSeries(ctx, 1, 6), RealOddSeries(ctx, 1, 6)}};
                for (int j = 0; j < 6; ++j) {
                    smp.state.v.c[j] = ctx.real(100 + 13 * i + j, 321);
                    smp.state.w.c[j] = ctx.real(-50 + 7 * i - j, 217);
                }
                traj.push_back(std::move(smp));
            }
            auto back = inverse_rescale(p2, rescale_k_to_1(p2, traj));
            XReal defect(ctx);
            for (size_t i = 0; i < traj.size(); ++i)
                for (int j = 0; j < 6; ++j) {
                    defect = max(defect, abs(back[i].state.v.c[j] - traj[i].state.v.c[j]));
                    defect = max(defect, abs(back[i].state.w.c[j] - traj[i].state.w.c[j]));
                }
            bool rt_ok = defect <= pow2(ctx, -(ctx.bits() - 16));
            ok = ok && rt_ok;
            det += " rescale-roundtrip=" + fmt(defect, 3);
        }

        // (f) outer-estimate ratio across an eps halving, plus truncation
        //     sensitivity of sup r
        {
            auto sup_ratio = [&](const char* eps, int n_max) {
                long bits = auto_bits(1, PrecisionContext(128).from_string(eps));
                PrecisionContext ctx(bits);
                ModelParams p = make_model(1, ctx.from_string(eps), OddPowerSeries{}, std::nullopt,
                                           n_max, bits);
                XReal tol = auto_tolerance(p);
                ManifoldExpansion ex = expand_unstable_manifold(p, 8, ctx.real(4.0) * ctx.sqrt2());
                XReal Y = auto_seed_Y(p, 8, ctx.real(4.0) * ctx.sqrt2());
                PhasePoint seed = ex.eval(ctx, -Y);
                SectionHit hit = find_symmetric_section(p, seed, -Y, ctx.real(6.0), tol);
                std::vector<XReal> grid;
                for (int i = 0; i <= 12; ++i)
                    grid.push_back(hit.y_star - ctx.real(3.0) + ctx.real(i, 4));
                Orbit o = integrate_orbit(p, ex.eval(ctx, -Y), -Y, hit.y_star, tol, grid);
                for (auto& smp : o.samples) smp.y -= hit.y_star;
                OuterRatioReport rep = check_outer_estimate(p, o);
                return rep.sup_ratio.rounded_to(PrecisionContext(128));
            };
            int nm = full ? 11 : 7;
            XReal s04 = sup_ratio("0.4", nm);
            XReal s02 = sup_ratio("0.2", nm);
            PrecisionContext c128(128);
            XReal ratio = s04 / s02;
            bool outer_ok = ratio <= c128.from_string("1.5") && ratio >= c128.from_string("0.6666");
            ok = ok && outer_ok;
            det += " outer(0.4)/outer(0.2)=" + fmt(ratio, 4);
            if (full) {
                XReal s9 = sup_ratio("0.4", 9);
                XReal s13 = sup_ratio("0.4", 13);
                XReal sens = abs(s9 - s13) / s13;
                bool sens_ok = sens <= c128.from_string("0.05");
                ok = ok && sens_ok;
                det += " nmax-sensitivity=" + fmt(sens, 3);
            }
        }

        // (g) splitting convergence under refinement (full scale only)
        if (full) {
            PrecisionContext cbase(128);
            XReal eps = cbase.from_string("0.21");
            auto run = [&](int n_max, long extra_bits, long tol_div) {
                long bits = auto_bits(1, eps) + extra_bits;
                PrecisionContext ctx(bits);
                ModelParams p = make_model(1, eps.rounded_to(ctx), OddPowerSeries{}, std::nullopt,
                                           n_max, bits);
                XReal tol = auto_tolerance(p) / tol_div;
                return measure_splitting(p, 8, ctx.real(4.0) * ctx.sqrt2(), ctx.zero(), tol)
                    .s_eps.rounded_to(PrecisionContext(128));
            };
            XReal s_base = run(11, 0, 1);
            XReal s_ref = run(15, 64, 100);
            XReal change = abs(s_base - s_ref) / s_ref;
            bool conv_ok = change <= cbase.from_string("0.01");
            ok = ok && conv_ok;
            det += " refine-change=" + fmt(change, 3);
        }

        r.pass = ok;
        r.detail = det;
    });
}

CriterionResult run_k_rescaling(Scale scale) {
    return guarded("A7 k-dependence via rescaling", [&](CriterionResult& r) {
        bool full = scale == Scale::Full;
        const char* eps_s = full ? "0.3" : "0.35";
        int nm = full ? 11 : 7;
        long bits2 = auto_bits(2, PrecisionContext(128).from_string(eps_s));
        PrecisionContext ctx(bits2);
        XReal eps = ctx.from_string(eps_s);

        ModelParams p2 = make_model(2, eps, OddPowerSeries{}, std::nullopt, nm, bits2);
        XReal tol2 = auto_tolerance(p2);
        SplittingSample s2 = measure_splitting(p2, 8, ctx.real(4.0) * ctx.sqrt2(), ctx.zero(), tol2);

        XReal eps1 = eps / ctx.sqrt2();
        long bits1 = auto_bits(1, eps1);
        PrecisionContext ctx1(bits1);
        ModelParams p1 = make_model(1, eps1.rounded_to(ctx1), OddPowerSeries{}, std::nullopt, nm,
                                    bits1);
        XReal tol1 = auto_tolerance(p1);
        SplittingSample s1 = measure_splitting(p1, 8, ctx1.real(4.0) * ctx1.sqrt2(), ctx1.zero(),
                                               tol1);

        // exact change of variables: s^{(2)}(eps) = sqrt2 * s^{(1)}(eps/sqrt2)
        PrecisionContext cc(256);
        XReal lhs = s2.s_eps.rounded_to(cc);
        XReal rhs = cc.sqrt2() * s1.s_eps.rounded_to(cc);
        XReal rel = abs(lhs - rhs) / rhs;
        r.pass = rel <= cc.from_string("1e-4") && s1.trusted && s2.trusted;
        r.detail = "s_k2=" + fmt(lhs, 10) + " sqrt2*s_k1=" + fmt(rhs, 10) + " rel=" + fmt(rel, 3);
    });
}

std::vector<CriterionResult> run_all(Scale scale,
                                     const std::function<void(const CriterionResult&)>& on_done) {
    std::vector<CriterionResult> out;
    auto push = [&](CriterionResult r) {
        if (on_done) on_done(r);
        out.push_back(std::move(r));
    };
    push(run_toy_oracle(scale));
    push(run_melnikov_cross_oracle(scale));
    push(run_stokes_stability(scale));
    push(run_splitting_law(scale));
    push(run_perturbative_consistency(scale));
    push(run_invariant_suite(scale));
    push(run_k_rescaling(scale));
    return out;
}

} // namespace kgsplit::accept
