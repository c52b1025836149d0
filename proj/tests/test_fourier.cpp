#include <doctest.h>

#include "kgsplit/fourier.hpp"

using namespace kgsplit;

namespace {

// Independent oracle: sine coefficients of ps(scale*v(tau)) by trapezoidal
// quadrature on a 4*n_max-point grid (spectrally exact for band-limited
// periodic integrands well beyond the polynomial degrees used here).
std::vector<XReal> quadrature_compose(const OddPowerSeries& ps, const RealOddSeries& v,
                                      const XReal& scale, int n_max, int oversample = 8) {
    PrecisionContext ctx = scale.context();
    int N = oversample * 4 * (n_max > 0 ? n_max : 1);
    std::vector<XReal> out((n_max + 1) / 2, ctx.zero());
    XReal two_pi = ctx.pi() * 2;
    for (int g = 0; g < N; ++g) {
        XReal tau = two_pi * g / N;
        XReal val(ctx);
        for (int j = 0; j < v.count(); ++j) val.add_mul(v.c[j], sin(tau * v.mode(j)));
        val *= scale;
        XReal fv(ctx);
        XReal u2 = val * val;
        XReal up = val * u2;   // u^3
        for (int d = 1; d <= ps.terms(); ++d) {
            fv.add_mul(ps.c[d - 1], up);
            up *= u2;
        }
        for (size_t j = 0; j < out.size(); ++j)
            out[j].add_mul(fv * 2 / N, sin(tau * (2 * static_cast<long>(j) + 1)));
    }
    return out;
}

} // namespace

TEST_CASE("project reads off coefficients") {
    PrecisionContext ctx(128);
    OddSineSeries s(ctx, 1, 4);   // modes 1,3,5,7
    s.c[0] = XComplex{ctx.real(1.0), ctx.zero()};
    CHECK(project(s, 1, ctx).re == ctx.real(1.0));
    CHECK(project(s, 3, ctx).re.is_zero());

    s.c[1] = XComplex{ctx.real(2.0), ctx.zero()};
    s.c[3] = XComplex{ctx.real(-5.0), ctx.zero()};
    CHECK(project(s, 7, ctx).re == ctx.real(-5.0));
    CHECK(project(s, 9, ctx).re.is_zero());   // beyond truncation
    CHECK_THROWS_AS(project(s, 2, ctx), ConfigError);
}

TEST_CASE("tilde_project zeroes the base mode only") {
    PrecisionContext ctx(128);
    OddSineSeries s(ctx, 1, 2);
    s.c[0] = XComplex{ctx.real(1.0), ctx.zero()};
    s.c[1] = XComplex{ctx.real(1.0), ctx.zero()};
    OddSineSeries t = tilde_project(s);
    CHECK(t.c[0].is_zero());
    CHECK(t.c[1].re == ctx.real(1.0));

    OddSineSeries z(ctx, 1, 3);
    OddSineSeries tz = tilde_project(z);
    CHECK(l1_norm(tz, ctx).is_zero());
}

TEST_CASE("l1 norm") {
    PrecisionContext ctx(128);
    RealOddSeries s(ctx, 1, 3);
    s.c[0] = ctx.real(2.0);
    s.c[2] = ctx.real(-3.0);   // mode 5
    CHECK(l1_norm(s, ctx) == ctx.real(5.0));
    RealOddSeries sin_tau(ctx, 1, 1);
    sin_tau.c[0] = ctx.real(1.0);
    CHECK(l1_norm(sin_tau, ctx) == ctx.real(1.0));
}

TEST_CASE("compose_odd: cube of sin tau") {
    PrecisionContext ctx(160);
    RealOddSeries v(ctx, 1, 2);
    v.c[0] = ctx.real(1.0);
    OddPowerSeries cube;
    cube.c = {ctx.real(1.0)};
    RealOddSeries r = compose_odd(cube, v, ctx.real(1.0), 3);
    // sin^3 = (3 sin - sin 3)/4, exact in the convolution arithmetic
    CHECK(r.c[0] == ctx.real(3, 4));
    CHECK(r.c[1] == ctx.real(-1, 4));
}

TEST_CASE("compose_odd: u^3/3 on a*sin(tau) gives the Duffing a^3/4 mode") {
    PrecisionContext ctx(160);
    RealOddSeries v(ctx, 1, 2);
    v.c[0] = ctx.from_string("0.7");
    OddPowerSeries g;
    g.c = {ctx.real(1, 3)};
    RealOddSeries r = compose_odd(g, v, ctx.real(1.0), 3);
    XReal expect = pow_si(ctx.from_string("0.7"), 3) / 4;
    CHECK(abs(r.c[0] - expect) <= pow2(ctx, -150));
}

TEST_CASE("compose_odd: u^5 of sin tau against the quadrature oracle") {
    PrecisionContext ctx(192);
    RealOddSeries v(ctx, 1, 3);
    v.c[0] = ctx.real(1.0);
    OddPowerSeries p5;
    p5.c = {ctx.zero(), ctx.real(1.0)};
    RealOddSeries r = compose_odd(p5, v, ctx.real(1.0), 5);
    // frozen closed form (10 sin - 5 sin3 + sin5)/16
    CHECK(abs(r.c[0] - ctx.real(10, 16)) <= pow2(ctx, -180));
    CHECK(abs(r.c[1] - ctx.real(-5, 16)) <= pow2(ctx, -180));
    CHECK(abs(r.c[2] - ctx.real(1, 16)) <= pow2(ctx, -180));
    // quadrature oracle agreement
    std::vector<XReal> q = quadrature_compose(p5, v, ctx.real(1.0), 5);
    for (int j = 0; j < 3; ++j) CHECK(abs(r.c[j] - q[j]) <= pow2(ctx, -160));
}

TEST_CASE("compose_odd matches quadrature where the band policy is exact") {
    // all powers stay inside the working band: degree 5 on modes <= 3 with
    // out_n_max = 15, so the truncation discards nothing
    PrecisionContext ctx(192);
    RealOddSeries v(ctx, 1, 2);
    v.c[0] = ctx.from_string("0.31");
    v.c[1] = ctx.from_string("-0.17");
    OddPowerSeries ps;
    ps.c = {ctx.real(1, 3), ctx.real(-1, 5)};
    XReal scale = ctx.from_string("0.8");
    TruncationInfo info;
    RealOddSeries r = compose_odd(ps, v, scale, 15, &info);
    CHECK(info.discarded_l1.is_zero());
    std::vector<XReal> q = quadrature_compose(ps, v, scale, 15);
    for (int j = 0; j < r.count(); ++j) CHECK(abs(r.c[j] - q[j]) <= pow2(ctx, -140));
}

TEST_CASE("band truncation error stays within the reported discarded mass") {
    PrecisionContext ctx(192);
    RealOddSeries v(ctx, 1, 8);   // modes up to 15: degree-7 powers overflow the band
    long seed = 12345;
    for (int j = 0; j < v.count(); ++j) {
        seed = (seed * 1103515245 + 12345) % 2147483648L;
        v.c[j] = ctx.real(seed % 1000 - 500, 10000);
    }
    OddPowerSeries ps;
    ps.c = {ctx.real(1, 3), ctx.real(-1, 5), ctx.real(1, 50)};
    XReal scale = ctx.from_string("0.8");
    TruncationInfo info;
    RealOddSeries r = compose_odd(ps, v, scale, 15, &info);
    std::vector<XReal> q = quadrature_compose(ps, v, scale, 15);
    XReal diff(ctx);
    for (int j = 0; j < r.count(); ++j) diff += abs(r.c[j] - q[j]);
    CHECK(diff <= info.discarded_l1 * 10 + pow2(ctx, -140));
    CHECK(info.warned);   // loss at this amplitude is observable, not silent
}

TEST_CASE("complex compose agrees with real compose on real data") {
    PrecisionContext ctx(160);
    RealOddSeries vr(ctx, 1, 3);
    vr.c[0] = ctx.from_string("0.3");
    vr.c[1] = ctx.from_string("-0.1");
    OddSineSeries vc(ctx, 1, 3);
    for (int j = 0; j < 3; ++j) vc.c[j] = XComplex{vr.c[j], ctx.zero()};
    OddPowerSeries ps;
    ps.c = {ctx.real(1, 3), ctx.real(2, 7)};
    RealOddSeries rr = compose_odd(ps, vr, ctx.real(1.0), 5);
    OddSineSeries rc = compose_odd(ps, vc, XComplex{ctx.real(1.0), ctx.zero()}, 5);
    for (int j = 0; j < 3; ++j) {
        CHECK(abs(rc.c[j].re - rr.c[j]) <= pow2(ctx, -150));
        CHECK(rc.c[j].im.is_zero());
    }
}

TEST_CASE("l1 sub-multiplicativity under the series product") {
    PrecisionContext ctx(160);
    // realized via compose of u^3 on sums: check |v^3|_l1 <= |v|_l1^3 on
    // randomized small series
    long seed = 777;
    for (int trial = 0; trial < 6; ++trial) {
        RealOddSeries v(ctx, 1, 5);
        for (int j = 0; j < v.count(); ++j) {
            seed = (seed * 1103515245 + 12345) % 2147483648L;
            v.c[j] = ctx.real(seed % 400 - 200, 4000);
        }
        OddPowerSeries cube;
        cube.c = {ctx.real(1.0)};
        RealOddSeries c3 = compose_odd(cube, v, ctx.real(1.0), 15);
        XReal lhs = l1_norm(c3, ctx);
        XReal n1 = l1_norm(v, ctx);
        CHECK(lhs <= n1 * n1 * n1 + pow2(ctx, -140));
    }
}

TEST_CASE("oddness closure: no even-mode mass in the full exponential table") {
    PrecisionContext ctx(160);
    RealOddSeries v(ctx, 1, 4);
    v.c[0] = ctx.from_string("0.4");
    v.c[1] = ctx.from_string("0.2");
    v.c[3] = ctx.from_string("-0.05");
    OddPowerSeries ps;
    ps.c = {ctx.real(1, 3), ctx.real(1, 9), ctx.real(-1, 11)};
    int band = 0;
    std::vector<XReal> table = compose_full_exponential(ps, v, ctx.real(1.0), &band);
    int even_checked = 0, odd_nonzero = 0;
    for (int n = -band; n <= band; ++n) {
        if (n % 2 == 0) {
            CHECK(table[n + band].is_zero());
            ++even_checked;
        } else if (!table[n + band].is_zero()) {
            ++odd_nonzero;
        }
    }
    CHECK(even_checked > 0);
    CHECK(odd_nonzero > 0);
}

TEST_CASE("convergence-radius precondition") {
    PrecisionContext ctx(128);
    RealOddSeries v(ctx, 1, 1);
    v.c[0] = ctx.real(2.0);
    OddPowerSeries ps;
    ps.c = {ctx.real(1.0)};
    ps.radius = ctx.real(1.0);
    CHECK_THROWS_AS(compose_odd(ps, v, ctx.real(1.0), 3), ConvergenceError);
}

TEST_CASE("truncation metadata reports discarded tail") {
    PrecisionContext ctx(128);
    RealOddSeries v(ctx, 1, 2);
    v.c[0] = ctx.real(1.0);
    v.c[1] = ctx.real(1.0);
    OddPowerSeries cube;
    cube.c = {ctx.real(1.0)};
    TruncationInfo info;
    compose_odd(cube, v, ctx.real(1.0), 3, &info);
    // (sin + sin3)^3 has mass at modes 5,7,9 which the truncation discards
    CHECK(info.discarded_l1 > ctx.zero());
    CHECK(info.warned);
    TruncationInfo info2;
    compose_odd(cube, v, ctx.real(1.0), 11, &info2);
    CHECK(info2.discarded_l1.is_zero());
    CHECK(!info2.warned);
}

TEST_CASE("stride-k series algebra (k=2 lattice)") {
    PrecisionContext ctx(160);
    RealOddSeries v(ctx, 2, 2);   // modes 2, 6
    v.c[0] = ctx.real(1.0);
    OddPowerSeries cube;
    cube.c = {ctx.real(1.0)};
    RealOddSeries r = compose_odd(cube, v, ctx.real(1.0), 6);
    // sin(2t)^3 = (3 sin2t - sin6t)/4 on the k=2 lattice
    CHECK(r.c[0] == ctx.real(3, 4));
    CHECK(r.c[1] == ctx.real(-1, 4));
    CHECK(r.stride == 2);
    CHECK(project(r, 6, ctx) == ctx.real(-1, 4));
}
