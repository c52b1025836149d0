#pragma once

// Odd sine-series algebra. A field odd and 2pi-periodic in tau is
//   v(tau) = sum_{j>=0} c[j] sin(m_j tau),  m_j = stride*(2j+1),
// with complex coefficients allowed (complex evolution variable). Products
// are evaluated by lifting to the exponential basis with the signed lift
// p[+m] = v_m, p[-m] = -v_m; an odd power 2d+1 of the field then has sine
// coefficients (-1)^d 4^{-d} (p conv ... conv p)[m].

#include <optional>
#include <vector>

#include "kgsplit/errors.hpp"
#include "kgsplit/precision.hpp"

namespace kgsplit {

inline PrecisionContext context_of(const XReal& x) { return x.context(); }
inline PrecisionContext context_of(const XComplex& z) { return z.re.context(); }

inline XReal abs_norm(const XReal& x) { return abs(x); }
inline XReal abs_norm(const XComplex& z) { return abs(z); }

template <class S>
struct OddSeries {
    int stride = 1;     // base mode k; stored modes are stride*(2j+1)
    std::vector<S> c;   // c[j] multiplies sin(stride*(2j+1) tau)

    OddSeries() = default;
    OddSeries(const PrecisionContext& ctx, int stride_, int count) : stride(stride_), c(count, S(ctx)) {}

    int count() const { return static_cast<int>(c.size()); }
    int n_max() const { return c.empty() ? 0 : stride * (2 * count() - 1); }
    int mode(int j) const { return stride * (2 * j + 1); }

    // index of mode n, or -1 if n is not on the stored grid
    int index_of(int n) const {
        if (n <= 0 || n % stride != 0) return -1;
        int q = n / stride;
        if (q % 2 == 0) return -1;
        return (q - 1) / 2;
    }
};

using OddSineSeries = OddSeries<XComplex>;
using RealOddSeries = OddSeries<XReal>;

template <class S>
struct PhasePointT {
    OddSeries<S> v, w;
};
using PhasePoint = PhasePointT<XReal>;
using PhasePointC = PhasePointT<XComplex>;

// Pi_n[v]. An even (stride-reduced) mode request is a caller bug; modes
// beyond the truncation project to 0.
template <class S>
S project(const OddSeries<S>& s, int n, const PrecisionContext& ctx) {
    if (n <= 0 || (n / (s.stride > 0 ? s.stride : 1)) % 2 == 0 || n % (s.stride > 0 ? s.stride : 1) != 0)
        throw ConfigError("project: mode must be an odd multiple of the stride");
    int j = s.index_of(n);
    if (j < 0 || j >= s.count()) return S(ctx);
    return s.c[j];
}

// PiTilde: zero the base mode, keep the rest.
template <class S>
OddSeries<S> tilde_project(OddSeries<S> s) {
    if (!s.c.empty()) s.c[0] = S(context_of(s.c[0]));
    return s;
}

template <class S>
XReal l1_norm(const OddSeries<S>& s, const PrecisionContext& ctx) {
    XReal r(ctx);
    for (const S& x : s.c) r += abs_norm(x);
    return r;
}

// Odd real-analytic germ sum_{d>=1} c_{2d+1} u^{2d+1}.
struct OddPowerSeries {
    std::vector<XReal> c;             // c[d-1] multiplies u^{2d+1}
    std::optional<XReal> radius;      // convergence radius hint

    int terms() const { return static_cast<int>(c.size()); }
    int degree() const { return 2 * terms() + 1; }

    // coefficient of u^deg (0 outside the stored range)
    XReal coeff(int deg, const PrecisionContext& ctx) const {
        if (deg < 3 || deg % 2 == 0) return ctx.zero();
        int d = (deg - 1) / 2;
        if (d - 1 >= terms()) return ctx.zero();
        return c[d - 1];
    }

    bool is_zero() const {
        for (const auto& x : c)
            if (!x.is_zero()) return false;
        return true;
    }
};

struct TruncationInfo {
    XReal discarded_l1;   // l1 mass dropped by band truncations
    bool warned = false;  // discarded mass exceeded 2^{-bits/2} * max(1, |result|)
};

namespace detail {

// Signed exponential lift on the stride-reduced lattice: arrays indexed by
// n' + band, n' = -band..band, entry at n' = mode/stride.
template <class S>
std::vector<S> lift(const OddSeries<S>& v, int band, const PrecisionContext& ctx) {
    std::vector<S> p(2 * band + 1, S(ctx));
    for (int j = 0; j < v.count(); ++j) {
        int n = 2 * j + 1;
        if (n > band) break;
        p[band + n] = v.c[j];
        p[band - n] = -v.c[j];
    }
    return p;
}

// a conv b restricted to |n| <= band_out; entries of a,b with the given
// parities (0 even, 1 odd) are the only nonzero ones.
template <class S>
std::vector<S> convolve(const std::vector<S>& a, int band_a, int parity_a,
                        const std::vector<S>& b, int band_b, int parity_b,
                        int band_out, const PrecisionContext& ctx) {
    std::vector<S> out(2 * band_out + 1, S(ctx));
    int start_a = ((band_a % 2) == (parity_a % 2)) ? 0 : 1;
    int start_b = ((band_b % 2) == (parity_b % 2)) ? 0 : 1;
    for (int ia = start_a; ia < 2 * band_a + 1; ia += 2) {
        int na = ia - band_a;
        const S& va = a[ia];
        if (va.is_zero()) continue;
        for (int ib = start_b; ib < 2 * band_b + 1; ib += 2) {
            int n = na + (ib - band_b);
            if (n < -band_out || n > band_out) continue;
            out[n + band_out].add_mul(va, b[ib]);
        }
    }
    return out;
}

template <class S>
XReal band_tail_l1(const std::vector<S>& a, int band, int keep, const PrecisionContext& ctx) {
    XReal m(ctx);
    for (int i = 0; i < 2 * band + 1; ++i) {
        int n = i - band;
        if (n > keep || n < -keep) m += abs_norm(a[i]);
    }
    return m;
}

} // namespace detail

// Sine series of ps(scale * v), truncated at out_n_max (a mode number that
// must be an odd multiple of v.stride). Working band 3*out_n_max during the
// convolutions; each power is truncated back to out_n_max before the next
// one, and the discarded l1 mass is reported through info.
template <class S>
OddSeries<S> compose_odd(const OddPowerSeries& ps, const OddSeries<S>& v, const S& scale,
                         int out_n_max, TruncationInfo* info = nullptr) {
    PrecisionContext ctx = context_of(scale);
    if (out_n_max <= 0 || out_n_max % v.stride != 0 || (out_n_max / v.stride) % 2 == 0)
        throw ConfigError("compose_odd: out_n_max must be an odd multiple of the stride");

    if (ps.radius) {
        XReal amp = l1_norm(v, ctx) * abs_norm(scale);
        if (!(amp < *ps.radius))
            throw ConvergenceError("compose_odd: l1 norm " + amp.to_string(8) +
                                   " outside convergence radius " + (*ps.radius).to_string(8));
    }

    const int keep = out_n_max / v.stride;   // reduced band kept after each power
    const int wide = 3 * keep;
    XReal tail(ctx);

    // power 1
    std::vector<S> u1 = detail::lift(v, wide, ctx);
    for (auto& x : u1) x = x * scale;
    tail += detail::band_tail_l1(u1, wide, keep, ctx);
    std::vector<S> pw(2 * keep + 1, S(ctx));
    for (int n = -keep; n <= keep; ++n) pw[n + keep] = u1[n + wide];

    // (scale v)^2 on band 2*keep, reused for every odd power step
    std::vector<S> sq = detail::convolve(pw, keep, 1, pw, keep, 1, 2 * keep, ctx);

    OddSeries<S> out(ctx, v.stride, (keep + 1) / 2);
    // |c| suffix sums track how discarded mass could re-enter later powers
    std::vector<XReal> suffix(ps.terms() + 1, ctx.zero());
    for (int d = ps.terms(); d >= 1; --d) suffix[d - 1] = suffix[d] + abs(ps.c[d - 1]);
    XReal factor = ctx.real(1.0);   // becomes (-1)^d 4^{-d}
    const XReal minus_quarter = ctx.real(-1, 4);
    for (int d = 1; d <= ps.terms(); ++d) {
        std::vector<S> pw_wide = detail::convolve(pw, keep, 1, sq, 2 * keep, 0, wide, ctx);
        factor *= minus_quarter;
        const XReal& cd = ps.c[d - 1];
        XReal cut = detail::band_tail_l1(pw_wide, wide, keep, ctx);
        if (!cd.is_zero()) {
            XReal w = cd * factor;
            tail.add_mul(abs(w), cut);
            for (int j = 0; j < out.count(); ++j)
                out.c[j] += pw_wide[wide + 2 * j + 1] * w;
        }
        if (d < ps.terms()) {
            tail.add_mul(cut * abs(factor), suffix[d]);
            for (int n = -keep; n <= keep; ++n) pw[n + keep] = pw_wide[n + wide];
        }
    }

    if (info) {
        info->discarded_l1 = tail;
        XReal floor = max(ctx.real(1.0), l1_norm(out, ctx));
        info->warned = tail > pow2(ctx, -(ctx.bits() / 2)) * floor;
    }
    return out;
}

// Phase average (1/2pi) int ps_even(scale*v) dtau for an even power series
// sum_{d>=1} even_coeffs[d-1] u^{2d}. Bands grow with the power, so the mean
// is exact for the truncated field.
template <class S>
S compose_even_mean(const std::vector<XReal>& even_coeffs, const OddSeries<S>& v, const S& scale) {
    PrecisionContext ctx = context_of(scale);
    int kv = v.count();
    S mean(ctx);
    if (kv == 0 || even_coeffs.empty()) return mean;
    const int bv = 2 * kv - 1;
    const int D = static_cast<int>(even_coeffs.size());
    std::vector<S> u1 = detail::lift(v, bv, ctx);
    for (auto& x : u1) x = x * scale;
    std::vector<S> sq = detail::convolve(u1, bv, 1, u1, bv, 1, 2 * bv, ctx);
    std::vector<S> pw = sq;
    int band = 2 * bv;
    XReal factor = ctx.real(1.0);   // becomes (-1)^d 4^{-d}
    const XReal minus_quarter = ctx.real(-1, 4);
    for (int d = 1; d <= D; ++d) {
        factor *= minus_quarter;
        if (!even_coeffs[d - 1].is_zero())
            mean += pw[band] * (even_coeffs[d - 1] * factor);
        if (d < D) {
            pw = detail::convolve(pw, band, 0, sq, 2 * bv, 0, band + 2 * bv, ctx);
            band += 2 * bv;
        }
    }
    return mean;
}

// Full exponential table of ps(scale*v) without any band truncation: used by
// tests to confirm that odd compositions carry exactly zero even-mode mass.
template <class S>
std::vector<S> compose_full_exponential(const OddPowerSeries& ps, const OddSeries<S>& v,
                                        const S& scale, int* band_out);

} // namespace kgsplit
