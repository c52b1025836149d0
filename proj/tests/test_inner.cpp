#include <doctest.h>

#include "kgsplit/inner.hpp"
#include "kgsplit/model.hpp"

using namespace kgsplit;

TEST_CASE("toy gamma series: frozen low-order values") {
    PrecisionContext ctx(192);
    XReal mu3 = mu_n(ctx, 3);
    // a = {a_3}: gamma_3 = a_3/mu3^2
    std::vector<XComplex> a3{XComplex{ctx.real(1.0), ctx.zero()}};
    auto g = toy_gamma_series(a3, 3, ctx);
    CHECK(abs(g[0].re - ctx.real(1.0) / (mu3 * mu3)) <= pow2(ctx, -180));

    // a = {a_5 only}: gamma_5 = a_5/mu3^2, gamma_7 = -30 a_5 / mu3^4
    std::vector<XComplex> a5{XComplex(ctx), XComplex(ctx), XComplex{ctx.real(2.0), ctx.zero()}};
    auto g5 = toy_gamma_series(a5, 9, ctx);
    CHECK(g5[0].is_zero());   // gamma_3
    CHECK(g5[1].is_zero());   // gamma_4
    CHECK(abs(g5[2].re - ctx.real(2.0) / (mu3 * mu3)) <= pow2(ctx, -180));
    XReal expect7 = ctx.real(-30.0) * ctx.real(2.0) / pow_si(mu3, 4);
    CHECK(abs(g5[4].re - expect7) <= pow2(ctx, -175));
}

TEST_CASE("toy gamma series is Gevrey-1 for a_l = 1/l^2") {
    PrecisionContext ctx(192);
    std::vector<XComplex> a;
    for (int l = 3; l <= 60; ++l) a.push_back(XComplex{ctx.real(1, l * l), ctx.zero()});
    auto g = toy_gamma_series(a, 60, ctx);
    XReal sup(ctx);
    for (int l = 3; l <= 60; ++l) sup = max(sup, abs(g[l - 3]) / factorial(ctx, l));
    CHECK(sup <= ctx.real(1.0));
}

TEST_CASE("toy closed form: frozen value, zero case, a_4 phase") {
    PrecisionContext ctx(256);
    XReal mu3 = mu_n(ctx, 3);
    std::vector<XComplex> a{XComplex{ctx.real(1.0), ctx.zero()}};
    XComplex v = toy_splitting_closed_form(a, ctx.real(5.0), ctx);
    // -pi e^{-5 mu3} i^2 mu3/2! = +(pi mu3/2) e^{-5 mu3} = pi sqrt2 e^{-10 sqrt2}
    XReal expect = ctx.pi() * ctx.sqrt2() * exp(ctx.real(-10.0) * ctx.sqrt2());
    CHECK(abs(v.re - expect) <= expect * pow2(ctx, -230));
    CHECK(abs(v.im) <= expect * pow2(ctx, -230));

    std::vector<XComplex> zero;
    CHECK(toy_splitting_closed_form(zero, ctx.real(5.0), ctx).is_zero());

    // single a_4: contribution i^3 mu3^2/3! a_4 (-pi e^{-mu3 kappa}), purely imaginary
    std::vector<XComplex> a4{XComplex(ctx), XComplex{ctx.real(1.0), ctx.zero()}};
    XComplex v4 = toy_splitting_closed_form(a4, ctx.real(5.0), ctx);
    XReal expect4 = ctx.pi() * (mu3 * mu3 / 6) * exp(-(mu3 * ctx.real(5.0)));
    CHECK(abs(v4.re) <= expect4 * pow2(ctx, -230));
    CHECK(abs(v4.im - expect4) <= expect4 * pow2(ctx, -230));
}

TEST_CASE("toy numeric oracle matches the closed form (flagship)") {
    PrecisionContext ctx(256);
    std::vector<XComplex> a{XComplex{ctx.real(1.0), ctx.zero()}};
    XReal kappa = ctx.real(5.0);
    XComplex closed = toy_splitting_closed_form(a, kappa, ctx);
    XComplex numeric = toy_splitting_numeric(a, kappa, ctx.real(20.0), ctx, ctx.from_string("1e-16"));
    XReal rel = abs(numeric - closed) / abs(closed);
    CHECK(rel <= ctx.from_string("1e-6"));

    // linearity: doubling a doubles the splitting
    std::vector<XComplex> a2{XComplex{ctx.real(2.0), ctx.zero()}};
    XComplex numeric2 = toy_splitting_numeric(a2, kappa, ctx.real(20.0), ctx, ctx.from_string("1e-16"));
    CHECK(abs(numeric2 - numeric * ctx.real(2.0)) / abs(numeric2) <= ctx.from_string("1e-6"));

    // zero forcing stays zero
    std::vector<XComplex> zvec{XComplex(ctx)};
    XComplex numeric0 = toy_splitting_numeric(zvec, kappa, ctx.real(20.0), ctx, ctx.from_string("1e-16"));
    CHECK(abs(numeric0) <= ctx.from_string("1e-30"));
}

TEST_CASE("formal inner series: frozen leading coefficients") {
    PrecisionContext ctx(192);
    OddPowerSeries f;
    FormalModeSeries s = formal_inner_series(f, 5, 15, ctx);

    // leading term
    CHECK(abs(s.coeff(1, 1, ctx).im + ctx.real(2.0) * ctx.sqrt2()) <= pow2(ctx, -180));
    // beta_{3,3} = -Pi_3[(1/3)L^3] = +4 sqrt2 i / 3
    XComplex b33 = s.beta[2][0];
    XReal expect = ctx.real(4.0) * ctx.sqrt2() / 3;
    CHECK(abs(b33.im - expect) <= pow2(ctx, -175));
    CHECK(abs(b33.re) <= pow2(ctx, -175));
    // c_{3,3} = beta_{3,3}/mu3^2 = sqrt2 i/6
    CHECK(abs(s.coeff(3, 3, ctx).im - ctx.sqrt2() / 6) <= pow2(ctx, -175));
    // all coefficients are purely imaginary (i * real parity structure)
    for (int j = 1; j <= s.Jmax; ++j)
        for (int mm = 0; mm < s.mode_count(); ++mm) CHECK(s.c[j - 1][mm].re.is_zero());
}

TEST_CASE("formal inner series: f-linearity at lowest order") {
    PrecisionContext ctx(192);
    OddPowerSeries f1;
    f1.c = {ctx.zero(), ctx.real(1.0)};   // u^5
    OddPowerSeries f2;
    f2.c = {ctx.zero(), ctx.real(2.0)};
    FormalModeSeries s0 = formal_inner_series(OddPowerSeries{}, 5, 9, ctx);
    FormalModeSeries s1 = formal_inner_series(f1, 5, 9, ctx);
    FormalModeSeries s2 = formal_inner_series(f2, 5, 9, ctx);
    XComplex d1 = s1.beta[4][0] - s0.beta[4][0];
    XComplex d2 = s2.beta[4][0] - s0.beta[4][0];
    CHECK(abs(d2 - d1 * ctx.real(2.0)) <= pow2(ctx, -170));
    CHECK(abs(d1) > pow2(ctx, -20));
}

TEST_CASE("formal series term sizes show the divergent-series dip") {
    PrecisionContext ctx(224);
    FormalModeSeries s = formal_inner_series(OddPowerSeries{}, 5, 41, ctx);
    XReal z0 = ctx.real(8.0);
    std::vector<XReal> mags;
    XReal p = ctx.real(1.0) / z0;
    for (int j = 1; j <= s.Jmax; ++j) {
        XReal row(ctx);
        for (int mm = 0; mm < s.mode_count(); ++mm) row += abs(s.c[j - 1][mm]);
        mags.push_back(row * p);
        p /= z0;
    }
    int best = 3;
    for (int j = 3; j <= s.Jmax; j += 2)
        if (!mags[j - 1].is_zero() && mags[j - 1] < mags[best - 1]) best = j;
    CHECK(best > 9);
    CHECK(best < 41);
    CHECK(mags[s.Jmax - 1] > mags[best - 1] * 4);
}

TEST_CASE("seed_from_series: leading term dominates at large |z0|") {
    PrecisionContext ctx(192);
    FormalModeSeries s = formal_inner_series(OddPowerSeries{}, 5, 15, ctx);
    XComplex z0{ctx.real(-1000.0), ctx.real(-10.0)};
    SeedInfo seed = seed_from_series(s, z0, -1, ctx);
    XComplex lead = XComplex{ctx.zero(), -(ctx.real(2.0) * ctx.sqrt2())} / z0;
    CHECK(abs(seed.state.phi.v.c[0] - lead) / abs(lead) <= ctx.from_string("1e-4"));
    CHECK_THROWS_AS(seed_from_series(s, z0, 20000, ctx), SeedError);
}

TEST_CASE("integrate_inner: zero field stays zero") {
    PrecisionContext ctx(160);
    InnerState seed{XComplex{ctx.real(-5.0), ctx.real(-4.0)},
                    PhasePointC{OddSineSeries(ctx, 1, 3), OddSineSeries(ctx, 1, 3)}};
    Contour c;
    c.waypoints = {seed.z, XComplex{ctx.zero(), ctx.real(-4.0)}};
    c.step_ceiling = ctx.zero();
    InnerIntegrateOptions opts;
    opts.tol = ctx.from_string("1e-25");
    InnerState end = integrate_inner(OddPowerSeries{}, c, seed, opts);
    CHECK(l1_norm(end.phi.v, ctx).is_zero());
    CHECK(l1_norm(end.phi.w, ctx).is_zero());
}

TEST_CASE("integrate_inner reproduces the linearized mode-3 oscillation") {
    PrecisionContext ctx(224);
    XReal mu3 = mu_n(ctx, 3);
    // tiny mode-3 seed: the cubic coupling is O(amp^3), far below tolerance
    XReal amp = ctx.from_string("1e-25");
    XComplex z0{ctx.real(-12.0), ctx.real(-5.0)};
    InnerState seed{z0, PhasePointC{OddSineSeries(ctx, 1, 3), OddSineSeries(ctx, 1, 3)}};
    XComplex e0 = exp(XComplex{-(z0.im * mu3), z0.re * mu3}) * amp;
    seed.phi.v.c[1] = e0;
    seed.phi.w.c[1] = XComplex{-e0.im, e0.re} * mu3;
    Contour c;
    c.waypoints = {z0, XComplex{ctx.real(-2.0), ctx.real(-5.0)}};
    c.step_ceiling = ctx.zero();
    InnerIntegrateOptions opts;
    opts.tol = ctx.from_string("1e-45");
    InnerState end = integrate_inner(OddPowerSeries{}, c, seed, opts);
    XComplex z1 = c.waypoints[1];
    XComplex expect = exp(XComplex{-(z1.im * mu3), z1.re * mu3}) * amp;
    CHECK(abs(end.phi.v.c[1] - expect) / abs(expect) <= ctx.from_string("1e-12"));
    CHECK(end.phi.v.c[0].is_zero());
}

TEST_CASE("integrate_inner: homotopic contours agree (analyticity)") {
    PrecisionContext ctx(192);
    OddPowerSeries f;
    FormalModeSeries s = formal_inner_series(f, 3, 21, ctx);
    XComplex z0{ctx.real(-15.0), ctx.real(-6.0)};
    SeedInfo seed = seed_from_series(s, z0, -1, ctx);
    XReal tol = ctx.from_string("1e-26");
    InnerIntegrateOptions opts;
    opts.tol = tol;

    Contour straight;
    straight.waypoints = {z0, XComplex{ctx.zero(), ctx.real(-6.0)}};
    straight.step_ceiling = ctx.zero();
    InnerState e1 = integrate_inner(f, straight, seed.state, opts);

    Contour detour;
    detour.waypoints = {z0, XComplex{ctx.real(-15.0), ctx.real(-9.0)},
                        XComplex{ctx.zero(), ctx.real(-9.0)}, XComplex{ctx.zero(), ctx.real(-6.0)}};
    detour.step_ceiling = ctx.zero();
    InnerState e2 = integrate_inner(f, detour, seed.state, opts);

    XReal diff(ctx);
    for (int mm = 0; mm < 2; ++mm) {
        diff = max(diff, abs(e1.phi.v.c[mm] - e2.phi.v.c[mm]));
        diff = max(diff, abs(e1.phi.w.c[mm] - e2.phi.w.c[mm]));
    }
    CHECK(diff <= tol * exp(mu_n(ctx, 3) * 3) * 1000);

    Contour diag;
    diag.waypoints = {z0, XComplex{ctx.real(-10.0), ctx.real(-5.0)}};
    diag.step_ceiling = ctx.zero();
    CHECK_THROWS_AS(integrate_inner(f, diag, seed.state, opts), ConfigError);
}

TEST_CASE("seed consistency: two seed radii propagate to the same state") {
    PrecisionContext ctx(224);
    OddPowerSeries f;
    FormalModeSeries s = formal_inner_series(f, 5, 61, ctx);
    XReal im = ctx.real(-8.0);
    InnerIntegrateOptions opts;
    opts.tol = ctx.from_string("1e-30");
    auto run = [&](double x0) {
        XComplex z0{ctx.real(x0), im};
        SeedInfo seed = seed_from_series(s, z0, -1, ctx);
        Contour c;
        c.waypoints = {z0, XComplex{ctx.real(-10.0), im}};
        c.step_ceiling = ctx.zero();
        return std::pair<InnerState, XReal>(integrate_inner(f, c, seed.state, opts),
                                            seed.error_estimate);
    };
    auto [e25, err25] = run(-25.0);
    auto [e30, err30] = run(-30.0);
    XReal diff(ctx);
    for (int mm = 0; mm < 3; ++mm) diff = max(diff, abs(e25.phi.v.c[mm] - e30.phi.v.c[mm]));
    CHECK(diff <= (err25 + err30) * 4 + ctx.from_string("1e-28"));
}

TEST_CASE("extract_stokes: budget enforcement and a quick cubic run") {
    PrecisionContext ctx(96);
    OddPowerSeries f;
    CHECK_THROWS_AS(extract_stokes(f, ctx.real(10.0), ctx.real(6.0), 5, 96), BudgetError);

    PrecisionContext big(192);
    StokesEstimate est = extract_stokes(f, big.real(10.0), big.real(6.0), 5, 192);
    CHECK(est.trusted);
    // imaginary for real nonlinearities; r0 = 6 leaves O(1/r0) contamination
    CHECK(abs(est.c_at_r0.re) <= abs(est.c_at_r0.im) * big.from_string("0.4"));
    CHECK(abs(est.c_at_r0) > big.from_string("0.05"));
    CHECK(abs(est.c_at_r0) < big.real(100.0));
    CHECK(!est.conjecture_partial.empty());
}

TEST_CASE("conjecture sum reduces to the toy closed form for beta = a") {
    PrecisionContext ctx(224);
    FormalModeSeries s;
    s.n_max = 3;
    s.Jmax = 31;
    s.c.assign(s.Jmax, std::vector<XComplex>(2, XComplex(ctx)));
    s.beta.assign(s.Jmax, std::vector<XComplex>(1, XComplex(ctx)));
    std::vector<XComplex> a(9, XComplex(ctx));
    a[0] = XComplex{ctx.real(1.0), ctx.zero()};    // a_3
    a[2] = XComplex{ctx.real(-2.0), ctx.zero()};   // a_5
    a[6] = XComplex{ctx.real(1, 3), ctx.zero()};   // a_9
    for (size_t i = 0; i < a.size(); ++i) {
        int l = static_cast<int>(i) + 3;
        if (l % 2 == 1) s.beta[l - 1][0] = a[i];
    }
    ConjectureSums sums = stokes_conjecture_sum(s, s.Jmax, ctx);
    REQUIRE(!sums.partial.empty());
    XComplex expect = toy_splitting_closed_form(a, ctx.zero(), ctx);
    CHECK(abs(sums.partial.back() - expect) <= pow2(ctx, -200));
    CHECK(stokes_conjecture_sum(FormalModeSeries{}, 9, ctx).partial.empty());
}

TEST_CASE("inner_vector_field: equilibrium, leading-term forcing, oddness") {
    PrecisionContext ctx(192);
    OddPowerSeries f;
    PhasePointC zero{OddSineSeries(ctx, 1, 3), OddSineSeries(ctx, 1, 3)};
    PhasePointC dz = inner_vector_field(zero, f);
    CHECK(l1_norm(dz.v, ctx).is_zero());
    CHECK(l1_norm(dz.w, ctx).is_zero());

    // phi = -2 sqrt2 i/z sin tau at z = 2 - 3i: the mode-3 acceleration is
    // -Pi_3[(1/3) phi^3] = beta_{3,3}/z^3 with beta_{3,3} = 4 sqrt2 i/3
    XComplex z{ctx.real(2.0), ctx.real(-3.0)};
    XComplex lead = XComplex{ctx.zero(), -(ctx.real(2.0) * ctx.sqrt2())} / z;
    PhasePointC state{OddSineSeries(ctx, 1, 3), OddSineSeries(ctx, 1, 3)};
    state.v.c[0] = lead;
    PhasePointC ds = inner_vector_field(state, f);
    XComplex expect = XComplex{ctx.zero(), ctx.real(4.0) * ctx.sqrt2() / 3} / (z * z * z);
    CHECK(abs(ds.w.c[1] - expect) <= pow2(ctx, -170));
    // velocity part passes through
    CHECK(l1_norm(ds.v, ctx).is_zero());

    // brute-force Fourier quadrature oracle for the cube's mode-3 projection
    int N = 64;
    XComplex acc(ctx);
    XReal two_pi = ctx.pi() * 2;
    for (int g = 0; g < N; ++g) {
        XReal tau = two_pi * g / N;
        XComplex val = lead * sin(tau);
        XComplex cube = val * val * val * ctx.real(1, 3);
        acc += cube * sin(tau * 3);
    }
    acc = acc * ctx.real(2, N);
    CHECK(abs(ds.w.c[1] + acc) <= pow2(ctx, -165));

    // mode-1 line has no linear term: a_1 = -Pi_1[g(phi)] only
    XComplex a1_expect = -(XComplex{ctx.zero(), ctx.real(4.0) * ctx.sqrt2()} / (z * z * z));
    // Pi_1[(1/3)phi^3] = (1/3) lead^3 (3/4) = +4 sqrt2 i/z^3 ... sign folded
    CHECK(abs(ds.w.c[0] - a1_expect) <= pow2(ctx, -165));
}

TEST_CASE("integrate_inner: oversized vertical legs trip the budget guard") {
    PrecisionContext ctx(160);
    InnerState seed{XComplex{ctx.real(-5.0), ctx.real(-4.0)},
                    PhasePointC{OddSineSeries(ctx, 1, 3), OddSineSeries(ctx, 1, 3)}};
    Contour c;
    c.waypoints = {seed.z, XComplex{ctx.real(-5.0), ctx.real(-80.0)}};
    c.step_ceiling = ctx.zero();
    InnerIntegrateOptions opts;
    opts.tol = ctx.from_string("1e-20");
    CHECK_THROWS_AS(integrate_inner(OddPowerSeries{}, c, seed, opts), BudgetError);
}

TEST_CASE("seed optimal truncation meets the Gevrey-1 error scale") {
    PrecisionContext ctx(320);
    XReal mu3 = mu_n(ctx, 3);
    // deep series so the optimum is reachable at |z0| up to 30
    FormalModeSeries s = formal_inner_series(OddPowerSeries{}, 5, 89, ctx);
    for (double az : {20.0, 25.0, 30.0}) {
        // place z0 on the usual contour geometry with that modulus
        XReal a = ctx.real(az);
        XReal im = ctx.real(-8.0);
        XReal re = -sqrt(a * a - im * im);
        SeedInfo seed = seed_from_series(s, XComplex{re, im}, -1, ctx);
        XReal bound = exp(ctx.from_string("-0.9") * mu3 * a);
        CHECK(seed.error_estimate <= bound);
    }
}
