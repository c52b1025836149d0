#include <doctest.h>

#include "kgsplit/precision.hpp"

using namespace kgsplit;

TEST_CASE("required_bits obeys the budget rule") {
    PrecisionContext ctx(128);
    CHECK(required_bits(ctx.zero(), 0) == 53);

    // pi*sqrt(2)/0.2 nats with 64 guard bits
    XReal nats = ctx.pi() * ctx.sqrt2() / ctx.from_string("0.2");
    CHECK(required_bits(nats, 64) == 150);

    // 2*sqrt(2)*20 nats: the inner-extraction budget at r0 = 20
    XReal nats2 = ctx.real(2.0) * ctx.sqrt2() * ctx.real(20.0);
    CHECK(required_bits(nats2, 64) == 199);
}

TEST_CASE("required_bits is monotone in both arguments") {
    PrecisionContext ctx(96);
    long prev = -1;
    for (int i = 0; i <= 40; ++i) {
        XReal nats = ctx.real(i, 4);
        long b = required_bits(nats, 10);
        CHECK(b >= prev);
        prev = b;
        CHECK(required_bits(nats, 11) >= b);
    }
    CHECK_THROWS_AS(required_bits(ctx.real(-1.0), 0), BudgetError);
}

TEST_CASE("decimal string round trip at full precision") {
    PrecisionContext ctx(192);
    XReal x = ctx.pi() / ctx.real(7, 1);
    XReal y = ctx.from_string(x.to_string());
    CHECK(abs(x - y) <= pow2(ctx, -185));
    CHECK(ctx.from_string("0.5") == ctx.real(1, 2));
}

TEST_CASE("precision escalation consistency") {
    // a deterministic computation redone 64 bits higher and rounded back
    // agrees within 2^{-bits+guard}
    auto run = [](long bits) {
        PrecisionContext ctx(bits);
        XReal acc = ctx.real(1, 3);
        for (int i = 1; i <= 200; ++i) {
            acc = acc * ctx.real(2 * i + 1, 2 * i + 3) + ctx.real(1, i + 2);
            acc = sqrt(acc + ctx.real(i, 7));
        }
        return acc;
    };
    const long b1 = 128;
    XReal lo = run(b1);
    XReal hi = run(b1 + 64).rounded_to(PrecisionContext(b1));
    XReal rel = abs(lo - hi) / abs(hi);
    CHECK(rel <= pow2(PrecisionContext(b1), -b1 + 16));
}

TEST_CASE("exactness of representable sums and products") {
    PrecisionContext ctx(64);
    XReal a = ctx.real(3.0), b = ctx.real(0.25);
    CHECK((a + b) == ctx.real(13, 4));
    CHECK((a * b) == ctx.real(3, 4));
}

TEST_CASE("complex arithmetic and functions") {
    PrecisionContext ctx(160);
    XComplex i{ctx.zero(), ctx.real(1.0)};
    XComplex z = i * i;
    CHECK(z.re == ctx.real(-1.0));
    CHECK(z.im.is_zero());

    // exp(i pi) = -1
    XComplex e = exp(XComplex{ctx.zero(), ctx.pi()});
    CHECK(abs(e.re + ctx.real(1.0)) <= pow2(ctx, -150));
    CHECK(abs(e.im) <= pow2(ctx, -150));

    // atan of a small real matches the real series
    XComplex w = atan(XComplex{ctx.real(1, 10), ctx.zero()});
    CHECK(abs(w.re - atan(ctx.real(1, 10))) <= pow2(ctx, -150));
    CHECK(abs(w.im) <= pow2(ctx, -150));

    // division round trip
    XComplex num{ctx.real(3, 7), ctx.real(-2, 5)};
    XComplex den{ctx.real(1, 3), ctx.real(5, 11)};
    XComplex q = num / den;
    XComplex back = q * den;
    CHECK(abs(back.re - num.re) <= pow2(ctx, -150));
    CHECK(abs(back.im - num.im) <= pow2(ctx, -150));

    // complex sin against the addition formula at a known point
    XComplex s = sin(XComplex{ctx.pi() / 6, ctx.real(1.0)});
    CHECK(abs(s.re - ctx.real(1, 2) * cosh(ctx.real(1.0))) <= pow2(ctx, -150));
}
