#include <doctest.h>

#include "kgsplit/ode.hpp"

using namespace kgsplit;

TEST_CASE("rkf78 reproduces exp to tolerance") {
    PrecisionContext ctx(192);
    Rkf78<XReal> rk(ctx, 1, [](const XReal&, const std::vector<XReal>& y, std::vector<XReal>& dy) {
        dy[0] = y[0];
    });
    rk.set_tol(ctx.from_string("1e-24"));
    rk.set_state(ctx.zero(), {ctx.real(1.0)});
    rk.integrate_to(ctx.real(3.0));
    XReal expect = exp(ctx.real(3.0));
    CHECK(abs(rk.state()[0] - expect) / expect <= ctx.from_string("1e-22"));
}

TEST_CASE("rkf78 is 8th order on a nonlinear problem") {
    // y' = y^2 sin t + cos t * ... use y' = -y^3/2 with y(0)=1: y(t) = 1/sqrt(1+t)
    PrecisionContext ctx(256);
    auto f = [](const XReal&, const std::vector<XReal>& y, std::vector<XReal>& dy) {
        dy[0] = -(y[0] * y[0] * y[0]) / 2;
    };
    auto run_fixed = [&](long n) {
        Rkf78<XReal> rk(ctx, 1, f);
        rk.set_state(ctx.zero(), {ctx.real(1.0)});
        rk.integrate_fixed(ctx.real(2.0), n);
        XReal exact = ctx.real(1.0) / sqrt(ctx.real(3.0));
        return abs(rk.state()[0] - exact);
    };
    XReal e1 = run_fixed(16);
    XReal e2 = run_fixed(32);
    XReal ratio = e1 / e2;
    // 8th-order propagation: halving h divides the error by ~2^8 = 256
    CHECK(ratio > ctx.real(150.0));
    CHECK(ratio < ctx.real(420.0));
}

TEST_CASE("rkf78 oscillator accuracy at high precision") {
    // y'' = -omega^2 y integrated as a 2d system over many periods
    PrecisionContext ctx(256);
    XReal om = ctx.real(3.0);
    auto f = [om](const XReal&, const std::vector<XReal>& y, std::vector<XReal>& dy) {
        dy[0] = y[1];
        dy[1] = -(om * om) * y[0];
    };
    Rkf78<XReal> rk(ctx, 2, f);
    rk.set_tol(ctx.from_string("1e-20"));
    rk.set_state(ctx.zero(), {ctx.real(1.0), ctx.zero()});
    XReal t_end = ctx.pi() * 2;
    rk.integrate_to(t_end);
    // cos(6 pi) = 1, sin = 0
    CHECK(abs(rk.state()[0] - ctx.real(1.0)) <= ctx.from_string("1e-17"));
    CHECK(abs(rk.state()[1]) <= ctx.from_string("1e-16"));
}

TEST_CASE("backward-forward consistency") {
    PrecisionContext ctx(192);
    auto f = [](const XReal& t, const std::vector<XReal>& y, std::vector<XReal>& dy) {
        dy[0] = y[1];
        dy[1] = -sin(y[0]) - t * y[1] / 50;
    };
    XReal tol = ctx.from_string("1e-22");
    Rkf78<XReal> rk(ctx, 2, f);
    rk.set_tol(tol);
    std::vector<XReal> y0{ctx.from_string("0.3"), ctx.from_string("-0.2")};
    rk.set_state(ctx.zero(), y0);
    rk.integrate_to(ctx.real(5.0));
    rk.integrate_to(ctx.zero());
    CHECK(abs(rk.state()[0] - y0[0]) <= tol * 10);
    CHECK(abs(rk.state()[1] - y0[1]) <= tol * 10);
}

TEST_CASE("dense output via re-stepping hits interior points") {
    PrecisionContext ctx(192);
    auto f = [](const XReal&, const std::vector<XReal>& y, std::vector<XReal>& dy) { dy[0] = y[0]; };
    Rkf78<XReal> rk(ctx, 1, f);
    rk.set_tol(ctx.from_string("1e-21"));
    rk.set_state(ctx.zero(), {ctx.real(1.0)});
    rk.integrate_to(ctx.real(1.0));
    // query the middle of the final step
    XReal tq = (rk.t_prev() + rk.t()) / 2;
    std::vector<XReal> yq = rk.eval_within_last_step(tq);
    CHECK(abs(yq[0] - exp(tq)) <= ctx.from_string("1e-19"));
}

TEST_CASE("complex scalar integration: rotation") {
    PrecisionContext ctx(192);
    // z' = i z  =>  z(t) = e^{it}
    auto f = [](const XReal&, const std::vector<XComplex>& y, std::vector<XComplex>& dy) {
        dy[0] = XComplex{-y[0].im, y[0].re};
    };
    Rkf78<XComplex> rk(ctx, 1, f);
    rk.set_tol(ctx.from_string("1e-20"));
    rk.set_state(ctx.zero(), {XComplex{ctx.real(1.0), ctx.zero()}});
    rk.integrate_to(ctx.pi());
    CHECK(abs(rk.state()[0].re + ctx.real(1.0)) <= ctx.from_string("1e-17"));
    CHECK(abs(rk.state()[0].im) <= ctx.from_string("1e-17"));
}

TEST_CASE("step ceiling is honored") {
    PrecisionContext ctx(128);
    auto f = [](const XReal&, const std::vector<XReal>& y, std::vector<XReal>& dy) { dy[0] = y[0]; };
    Rkf78<XReal> rk(ctx, 1, f);
    rk.set_tol(ctx.real(1.0));   // loose: h would grow without the ceiling
    rk.set_h_limits(ctx.zero(), ctx.real(1, 100));
    rk.set_state(ctx.zero(), {ctx.real(1.0)});
    rk.integrate_to(ctx.real(1.0));
    CHECK(rk.accepted_steps() >= 100);
}
