#include "kgsplit/melnikov.hpp"

#include <algorithm>
#include <cmath>

#include "kgsplit/model.hpp"

namespace kgsplit {

namespace {

// dense univariate polynomials, index = degree
using Poly = std::vector<XReal>;

Poly poly_mul(const Poly& a, const Poly& b, int deg_cap, const PrecisionContext& ctx) {
    Poly out(std::min<size_t>(deg_cap + 1, a.size() + b.size() - 1), ctx.zero());
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero()) continue;
        for (size_t j = 0; j < b.size() && i + j <= static_cast<size_t>(deg_cap); ++j) {
            if (b[j].is_zero()) continue;
            out[i + j].add_mul(a[i], b[j]);
        }
    }
    return out;
}

} // namespace

OddPowerSeries delta_of_f(const OddPowerSeries& f, int P, const PrecisionContext& ctx) {
    if (P < 2) throw ConfigError("delta_of_f: P must be >= 2");
    // Delta = -(sin(sqrt2 u)/sqrt2 - u + u^3/3) - f = -tail - f
    OddPowerSeries tail = sine_gordon_tail(ctx, std::max(P, f.terms()));
    OddPowerSeries delta;
    delta.c.assign(tail.terms(), ctx.zero());
    for (int d = 1; d <= tail.terms(); ++d) {
        XReal c = -tail.c[d - 1];
        if (d - 1 < f.terms()) c -= f.c[d - 1];
        delta.c[d - 1] = c;
    }
    return delta;
}

DeltaSeries theta_taylor(const OddPowerSeries& delta, int P, const PrecisionContext& ctx) {
    if (P < 1) throw ConfigError("theta_taylor: P must be >= 1");
    // A(z) = 2 sqrt2 arctan z truncated at degree P
    Poly A(P + 1, ctx.zero());
    XReal two_sqrt2 = ctx.real(2.0) * ctx.sqrt2();
    for (int m = 0; 2 * m + 1 <= P; ++m) {
        XReal c = two_sqrt2 / (2 * m + 1);
        if (m % 2 == 1) c.negate();
        A[2 * m + 1] = c;
    }
    // Delta(A(z)) summed over odd powers of A
    Poly A2 = poly_mul(A, A, P, ctx);
    Poly Apow = poly_mul(A, A2, P, ctx);   // A^3
    Poly comp(P + 1, ctx.zero());
    for (int d = 1; d <= delta.terms(); ++d) {
        if (2 * d + 1 > P && d > 1) break;
        if (!delta.c[d - 1].is_zero())
            for (size_t i = 0; i < Apow.size(); ++i) comp[i].add_mul(delta.c[d - 1], Apow[i]);
        if (d < delta.terms()) Apow = poly_mul(Apow, A2, P, ctx);
    }
    // divide by 1 + z^2: multiply with sum (-1)^m z^{2m}
    DeltaSeries out;
    out.P = P;
    out.d.assign(P, ctx.zero());
    Poly inv(P + 1, ctx.zero());
    for (int m = 0; 2 * m <= P; ++m) inv[2 * m] = ctx.real(m % 2 == 0 ? 1 : -1, 1);
    Poly theta = poly_mul(comp, inv, P, ctx);
    for (int p = 1; p <= P; ++p) out.d[p - 1] = theta[p];
    return out;
}

SeriesValue s_of_delta(const DeltaSeries& ds, int Q, const PrecisionContext& ctx) {
    if (Q < 0) throw ConfigError("s_of_delta: Q must be >= 0");
    if (ds.P < 5 + 2 * Q)
        throw ConfigError("s_of_delta: needs Delta_p through p = 5 + 2Q = " +
                          std::to_string(5 + 2 * Q));
    auto Gamma = [&](int p) {
        if (p <= 0) return ctx.zero();
        XReal g = ds.coeff(p, ctx) / ctx.real(static_cast<long>(p + 1) * (p + 1), 1);
        if ((p / 2) % 2 == 1) g.negate();
        return g;
    };
    auto B = [&](int p) { return (Gamma(p) - Gamma(p - 2)) * p; };
    auto A = [&](int p) { return B(p + 2) - B(p); };

    XReal sum(ctx), last(ctx);
    XReal pow_m2 = ctx.real(1.0);
    for (int q = 0; q <= Q; ++q) {
        XReal term = pow_m2 / (factorial(ctx, q) * factorial(ctx, 3 + q));
        term *= A(3 + 2 * q);
        sum += term;
        last = abs(term);
        pow_m2 *= ctx.real(-2, 1);
    }
    return {sum, last};
}

XComplex c_in_prime(const OddPowerSeries& f, int Q, const PrecisionContext& ctx, SeriesValue* s_out) {
    int P = 5 + 2 * Q;
    OddPowerSeries delta = delta_of_f(f, std::max(2, (P - 1) / 2), ctx);
    DeltaSeries theta = theta_taylor(delta, P, ctx);
    SeriesValue S = s_of_delta(theta, Q, ctx);
    if (s_out) *s_out = S;
    XReal mag = ctx.real(4.0) * ctx.sqrt2() * ctx.pi() * S.value;
    return {ctx.zero(), mag};
}

XComplex inner_breather(const XComplex& z, const XReal& tau) {
    PrecisionContext ctx = z.re.context();
    XReal st = sin(tau);
    XReal az = abs(z);
    if (az.is_zero() || abs(st) / az > ctx.from_string("0.95"))
        throw SingularityError("inner_breather: too close to the arctan branch points z = +-i sin tau");
    // w = -i sin(tau)/z
    XComplex w = XComplex{ctx.zero(), -st} / z;
    return atan(w) * (ctx.real(2.0) * ctx.sqrt2());
}

XComplex xi_homogeneous(int n, int sign, const XComplex& z, const XReal& tau) {
    PrecisionContext ctx = z.re.context();
    if (n < 2) throw ConfigError("xi_homogeneous: requires n >= 2");
    if (sign != 1 && sign != -1) throw ConfigError("xi_homogeneous: sign must be +-1");
    XReal st = sin(tau), ct = cos(tau);
    XComplex z2 = z * z;
    XComplex denom = XComplex{ctx.real(1.0), ctx.zero()} - XComplex{st * st, ctx.zero()} / z2;
    if (abs(denom) < ctx.from_string("0.05"))
        throw SingularityError("xi_homogeneous: denominator 1 - sin^2(tau)/z^2 degenerates");
    XReal mu = mu_n(ctx, n);
    XReal mu2 = mu * mu;

    auto chi = [&](int l) {
        // e^{sign i mu z + i l tau} (1 - sin^2/z^2)^{-1} *
        //   { sign mu/(2z) - (l/2) cos sin / z^2 - (i/4) mu^2 + i (l^2+1)/4 sin^2/z^2 }
        XComplex phase = exp(XComplex{-(z.im * mu) * sign, z.re * mu * sign} +
                             XComplex{ctx.zero(), tau * l});
        XComplex brace = XComplex{mu * sign, ctx.zero()} / (z * ctx.real(2.0));
        brace = brace - XComplex{ct * st * ctx.real(l, 2), ctx.zero()} / z2;
        brace = brace - XComplex{ctx.zero(), mu2 * ctx.real(1, 4)};
        brace = brace + XComplex{ctx.zero(), st * st * ctx.real(static_cast<long>(l) * l + 1, 4)} / z2;
        return phase * brace / denom;
    };
    return (chi(n) - chi(-n)) * (ctx.real(2.0) / mu2);
}

void legendre_rule(int n, const PrecisionContext& ctx, std::vector<XReal>& nodes,
                   std::vector<XReal>& weights) {
    nodes.assign(n, ctx.zero());
    weights.assign(n, ctx.zero());
    for (int i = 0; i < n; ++i) {
        // Chebyshev initial guess, then Newton on P_n
        double x0 = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        XReal x = ctx.real(x0);
        XReal dp(ctx);
        for (int it = 0; it < 100; ++it) {
            // evaluate P_n and P_n' by the three-term recurrence
            XReal p0 = ctx.real(1.0), p1 = x;
            for (int k = 2; k <= n; ++k) {
                XReal p2 = (x * p1 * (2 * k - 1) - p0 * (k - 1)) / k;
                p0 = p1;
                p1 = p2;
            }
            // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
            dp = (x * p1 - p0) * n / (x * x - ctx.real(1.0));
            XReal dx = p1 / dp;
            x -= dx;
            if (abs(dx) <= pow2(ctx, -(ctx.bits() - 8))) break;
        }
        nodes[i] = x;
        weights[i] = ctx.real(2.0) / ((ctx.real(1.0) - x * x) * dp * dp);
    }
}

QuadratureResult melnikov_quadrature(const OddPowerSeries& f, const XReal& r, const XReal& S_cut,
                                     const MelnikovGrid& grid, const PrecisionContext& ctx) {
    if (!(r >= ctx.real(2.0))) throw ConfigError("melnikov_quadrature: requires r >= 2");
    if (!(S_cut > ctx.real(4.0))) throw ConfigError("melnikov_quadrature: S_cut too small");
    OddPowerSeries delta = delta_of_f(f, 24, ctx);

    // Delta evaluated by Horner in u^2
    auto delta_eval = [&](const XComplex& u) {
        XComplex u2 = u * u;
        XComplex acc(ctx);
        for (int d = delta.terms(); d >= 1; --d) {
            acc = acc * u2;
            if (!delta.c[d - 1].is_zero()) acc += XComplex{delta.c[d - 1], ctx.zero()};
        }
        return acc * u2 * u;   // Horner in u^2 times u^3 restores the odd degrees
    };

    XReal mu3 = mu_n(ctx, 3);
    XComplex zbase{ctx.zero(), -r};
    std::vector<XReal> gl_x, gl_w;
    legendre_rule(grid.gl_points, ctx, gl_x, gl_w);

    XReal two_pi = ctx.pi() * 2;
    int Nt = grid.n_tau;
    std::vector<XReal> taus, dtau;
    for (int it = 0; it < Nt; ++it) taus.push_back(two_pi * it / Nt);

    auto integrand_tau = [&](const XComplex& zs) {
        // (1/2pi) * 2pi/Nt sum over tau of Delta(phi_b) xi_3^+  -> plain mean * 2pi
        XComplex acc(ctx);
        for (int it = 0; it < Nt; ++it) {
            XComplex u = inner_breather(zs, taus[it]);
            if (u.is_zero()) continue;
            acc += delta_eval(u) * xi_homogeneous(3, +1, zs, taus[it]);
        }
        return acc * (two_pi / Nt);
    };

    long n_panels = std::max<long>(1, ceil_long(S_cut * 2 / ctx.real(grid.panel_width)));
    XReal h = S_cut * 2 / n_panels;
    XComplex total(ctx);
    for (long pnl = 0; pnl < n_panels; ++pnl) {
        XReal a = -S_cut + h * pnl;
        XReal mid = a + h / 2;
        XReal half = h / 2;
        for (int gq = 0; gq < grid.gl_points; ++gq) {
            XReal s = mid + half * gl_x[gq];
            XComplex val = integrand_tau(zbase + XComplex{s, ctx.zero()});
            total += val * (gl_w[gq] * half);
        }
    }

    // |s|^{-5} tail: |I(s)| <= K (S/|s|)^5 beyond the cut
    XReal k_plus = abs(integrand_tau(zbase + XComplex{S_cut, ctx.zero()}));
    XReal k_minus = abs(integrand_tau(zbase - XComplex{S_cut, ctx.zero()}));
    XReal tail = (k_plus + k_minus) * S_cut / 4;

    // value = total / (2 pi i mu_3)
    XComplex denom{ctx.zero(), two_pi * mu3};
    QuadratureResult out{total / denom, tail / (two_pi * mu3)};
    return out;
}

} // namespace kgsplit
