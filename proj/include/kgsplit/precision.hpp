#pragma once

// Extended-precision scalars on top of MPFR. Precision is carried by values,
// never by ambient state: a PrecisionContext is a value object, every XReal
// remembers the precision it was created at, and mixed-precision arithmetic
// rounds (nearest-even) at the wider of the operand precisions.

#include <mpfr.h>

#include <cstdint>
#include <string>
#include <utility>

#include "kgsplit/errors.hpp"

namespace kgsplit {

class XReal;

class PrecisionContext {
  public:
    explicit PrecisionContext(long mantissa_bits) : bits_(mantissa_bits) {
        if (mantissa_bits < 53)
            throw PrecisionError("PrecisionContext: mantissa_bits must be >= 53");
    }

    long bits() const noexcept { return bits_; }

    bool operator==(const PrecisionContext&) const = default;

    // Literal factories. Decimal strings are the preferred entry point for
    // non-representable constants; doubles are for exactly representable ones.
    XReal real(double v) const;
    XReal real(long num, long den) const; // exact rational, rounded once
    XReal from_string(const std::string& decimal) const;
    XReal zero() const;

    // Correctly rounded constants at this context.
    XReal pi() const;
    XReal ln2() const;
    XReal sqrt2() const;

    PrecisionContext escalated(long extra_bits) const { return PrecisionContext(bits_ + extra_bits); }

  private:
    long bits_;
};

class XReal {
  public:
    XReal() { mpfr_init2(x_, 53); mpfr_set_nan(x_); }
    explicit XReal(const PrecisionContext& ctx) { mpfr_init2(x_, ctx.bits()); mpfr_set_zero(x_, 1); }
    XReal(const PrecisionContext& ctx, double v) { mpfr_init2(x_, ctx.bits()); mpfr_set_d(x_, v, MPFR_RNDN); }
    XReal(const PrecisionContext& ctx, const std::string& decimal) {
        mpfr_init2(x_, ctx.bits());
        if (mpfr_set_str(x_, decimal.c_str(), 10, MPFR_RNDN) != 0)
            throw ConfigError("XReal: cannot parse decimal string '" + decimal + "'");
    }

    XReal(const XReal& o) { mpfr_init2(x_, mpfr_get_prec(o.x_)); mpfr_set(x_, o.x_, MPFR_RNDN); }
    XReal(XReal&& o) noexcept { mpfr_init2(x_, 53); mpfr_swap(x_, o.x_); }
    XReal& operator=(const XReal& o) {
        if (this != &o) { mpfr_set_prec(x_, mpfr_get_prec(o.x_)); mpfr_set(x_, o.x_, MPFR_RNDN); }
        return *this;
    }
    XReal& operator=(XReal&& o) noexcept { mpfr_swap(x_, o.x_); return *this; }
    ~XReal() { mpfr_clear(x_); }

    long prec() const { return mpfr_get_prec(x_); }
    PrecisionContext context() const { return PrecisionContext(prec() < 53 ? 53 : prec()); }

    double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }
    long to_long() const { return mpfr_get_si(x_, MPFR_RNDN); }
    // Full-precision decimal round trip (digits = 0 picks enough digits).
    std::string to_string(size_t digits = 0) const;

    bool is_nan() const { return mpfr_nan_p(x_) != 0; }
    bool is_zero() const { return mpfr_zero_p(x_) != 0; }
    int sign() const { return mpfr_sgn(x_); }

    // In-place ops round at this value's precision.
    XReal& operator+=(const XReal& o) { mpfr_add(x_, x_, o.x_, MPFR_RNDN); return *this; }
    XReal& operator-=(const XReal& o) { mpfr_sub(x_, x_, o.x_, MPFR_RNDN); return *this; }
    XReal& operator*=(const XReal& o) { mpfr_mul(x_, x_, o.x_, MPFR_RNDN); return *this; }
    XReal& operator/=(const XReal& o) { mpfr_div(x_, x_, o.x_, MPFR_RNDN); return *this; }
    XReal& operator*=(long s) { mpfr_mul_si(x_, x_, s, MPFR_RNDN); return *this; }
    XReal& operator/=(long s) { mpfr_div_si(x_, x_, s, MPFR_RNDN); return *this; }

    XReal& negate() { mpfr_neg(x_, x_, MPFR_RNDN); return *this; }
    XReal& set_zero() { mpfr_set_zero(x_, 1); return *this; }
    // this += a*b without intermediate rounding.
    XReal& add_mul(const XReal& a, const XReal& b) { mpfr_fma(x_, a.x_, b.x_, x_, MPFR_RNDN); return *this; }
    XReal& sub_mul(const XReal& a, const XReal& b) { mpfr_fms(x_, a.x_, b.x_, x_, MPFR_RNDN); mpfr_neg(x_, x_, MPFR_RNDN); return *this; }

    friend XReal operator+(const XReal& a, const XReal& b) { XReal r(wider(a, b)); mpfr_add(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    friend XReal operator-(const XReal& a, const XReal& b) { XReal r(wider(a, b)); mpfr_sub(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    friend XReal operator*(const XReal& a, const XReal& b) { XReal r(wider(a, b)); mpfr_mul(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    friend XReal operator/(const XReal& a, const XReal& b) { XReal r(wider(a, b)); mpfr_div(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    friend XReal operator-(const XReal& a) { XReal r(a); r.negate(); return r; }
    friend XReal operator*(const XReal& a, long s) { XReal r(a); r *= s; return r; }
    friend XReal operator*(long s, const XReal& a) { return a * s; }
    friend XReal operator/(const XReal& a, long s) { XReal r(a); r /= s; return r; }

    friend bool operator<(const XReal& a, const XReal& b) { return mpfr_less_p(a.x_, b.x_) != 0; }
    friend bool operator<=(const XReal& a, const XReal& b) { return mpfr_lessequal_p(a.x_, b.x_) != 0; }
    friend bool operator>(const XReal& a, const XReal& b) { return mpfr_greater_p(a.x_, b.x_) != 0; }
    friend bool operator>=(const XReal& a, const XReal& b) { return mpfr_greaterequal_p(a.x_, b.x_) != 0; }
    friend bool operator==(const XReal& a, const XReal& b) { return mpfr_equal_p(a.x_, b.x_) != 0; }
    friend bool operator!=(const XReal& a, const XReal& b) { return !(a == b); }

    friend XReal abs(const XReal& a) { XReal r(a); mpfr_abs(r.x_, r.x_, MPFR_RNDN); return r; }
    friend XReal sqrt(const XReal& a) { XReal r(a); mpfr_sqrt(r.x_, a.x_, MPFR_RNDN); return r; }
    friend XReal exp(const XReal& a) { XReal r(a); mpfr_exp(r.x_, a.x_, MPFR_RNDN); return r; }
    friend XReal log(const XReal& a) { XReal r(a); mpfr_log(r.x_, a.x_, MPFR_RNDN); return r; }
    friend XReal sin(const XReal& a) { XReal r(a); mpfr_sin(r.x_, a.x_, MPFR_RNDN); return r; }
    friend XReal cos(const XReal& a) { XReal r(a); mpfr_cos(r.x_, a.x_, MPFR_RNDN); return r; }
    friend XReal tan(const XReal& a) { XReal r(a); mpfr_tan(r.x_, a.x_, MPFR_RNDN); return r; }
    friend XReal atan(const XReal& a) { XReal r(a); mpfr_atan(r.x_, a.x_, MPFR_RNDN); return r; }
    friend XReal sinh(const XReal& a) { XReal r(a); mpfr_sinh(r.x_, a.x_, MPFR_RNDN); return r; }
    friend XReal cosh(const XReal& a) { XReal r(a); mpfr_cosh(r.x_, a.x_, MPFR_RNDN); return r; }
    friend XReal tanh(const XReal& a) { XReal r(a); mpfr_tanh(r.x_, a.x_, MPFR_RNDN); return r; }
    friend XReal atan2(const XReal& y, const XReal& x) { XReal r(wider(y, x)); mpfr_atan2(r.x_, y.x_, x.x_, MPFR_RNDN); return r; }
    friend XReal hypot(const XReal& a, const XReal& b) { XReal r(wider(a, b)); mpfr_hypot(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    friend XReal pow_si(const XReal& a, long n) { XReal r(a); mpfr_pow_si(r.x_, a.x_, n, MPFR_RNDN); return r; }
    friend XReal nth_root(const XReal& a, unsigned long n) { XReal r(a); mpfr_rootn_ui(r.x_, a.x_, n, MPFR_RNDN); return r; }
    friend XReal max(const XReal& a, const XReal& b) { return a >= b ? a : b; }
    friend XReal min(const XReal& a, const XReal& b) { return a <= b ? a : b; }
    friend long floor_long(const XReal& a) { XReal r(a); mpfr_floor(r.x_, a.x_); return mpfr_get_si(r.x_, MPFR_RNDZ); }
    friend long ceil_long(const XReal& a) { XReal r(a); mpfr_ceil(r.x_, a.x_); return mpfr_get_si(r.x_, MPFR_RNDZ); }

    // Round a copy to a coarser context.
    XReal rounded_to(const PrecisionContext& ctx) const { XReal r(ctx); mpfr_set(r.x_, x_, MPFR_RNDN); return r; }

    mpfr_ptr raw() { return x_; }
    mpfr_srcptr raw() const { return x_; }

  private:
    static PrecisionContext wider(const XReal& a, const XReal& b) {
        long p = a.prec() > b.prec() ? a.prec() : b.prec();
        return PrecisionContext(p < 53 ? 53 : p);
    }
    mpfr_t x_;
};

inline XReal PrecisionContext::real(double v) const { return XReal(*this, v); }
inline XReal PrecisionContext::from_string(const std::string& s) const { return XReal(*this, s); }
inline XReal PrecisionContext::zero() const { return XReal(*this); }
inline XReal PrecisionContext::real(long num, long den) const {
    XReal r(*this);
    mpfr_set_si(r.raw(), num, MPFR_RNDN);
    if (den != 1) mpfr_div_si(r.raw(), r.raw(), den, MPFR_RNDN);
    return r;
}
inline XReal PrecisionContext::pi() const { XReal r(*this); mpfr_const_pi(r.raw(), MPFR_RNDN); return r; }
inline XReal PrecisionContext::ln2() const { XReal r(*this); mpfr_const_log2(r.raw(), MPFR_RNDN); return r; }
inline XReal PrecisionContext::sqrt2() const { XReal r(*this); mpfr_sqrt_ui(r.raw(), 2, MPFR_RNDN); return r; }

// Complex scalar as an ordered pair of XReal.
class XComplex {
  public:
    XReal re, im;

    XComplex() = default;
    explicit XComplex(const PrecisionContext& ctx) : re(ctx), im(ctx) {}
    XComplex(XReal r, XReal i) : re(std::move(r)), im(std::move(i)) {}
    explicit XComplex(const XReal& r) : re(r), im(r.context()) {}
    XComplex(const PrecisionContext& ctx, double r, double i) : re(ctx, r), im(ctx, i) {}

    bool is_zero() const { return re.is_zero() && im.is_zero(); }

    XComplex& operator+=(const XComplex& o) { re += o.re; im += o.im; return *this; }
    XComplex& operator-=(const XComplex& o) { re -= o.re; im -= o.im; return *this; }
    XComplex& operator*=(const XReal& s) { re *= s; im *= s; return *this; }
    XComplex& operator*=(const XComplex& o) { *this = *this * o; return *this; }

    friend XComplex operator+(const XComplex& a, const XComplex& b) { return {a.re + b.re, a.im + b.im}; }
    friend XComplex operator-(const XComplex& a, const XComplex& b) { return {a.re - b.re, a.im - b.im}; }
    friend XComplex operator-(const XComplex& a) { return {-a.re, -a.im}; }
    friend XComplex operator*(const XComplex& a, const XComplex& b) {
        XReal r = a.re * b.re; r.sub_mul(a.im, b.im);
        XReal i = a.re * b.im; i.add_mul(a.im, b.re);
        return {std::move(r), std::move(i)};
    }
    friend XComplex operator*(const XComplex& a, const XReal& s) { return {a.re * s, a.im * s}; }
    friend XComplex operator*(const XReal& s, const XComplex& a) { return a * s; }
    friend XComplex operator/(const XComplex& a, const XReal& s) { return {a.re / s, a.im / s}; }
    friend XComplex operator/(const XComplex& a, const XComplex& b) {
        XReal n = b.re * b.re; n.add_mul(b.im, b.im);
        XReal r = a.re * b.re; r.add_mul(a.im, b.im);
        XReal i = a.im * b.re; i.sub_mul(a.re, b.im);
        return {r / n, i / n};
    }

    friend XComplex conj(const XComplex& a) { return {a.re, -a.im}; }
    friend XReal abs(const XComplex& a) { return hypot(a.re, a.im); }
    friend XReal norm2(const XComplex& a) { XReal n = a.re * a.re; n.add_mul(a.im, a.im); return n; }

    XComplex& add_mul(const XComplex& a, const XComplex& b) {
        re.add_mul(a.re, b.re); re.sub_mul(a.im, b.im);
        im.add_mul(a.re, b.im); im.add_mul(a.im, b.re);
        return *this;
    }

    std::string to_string(size_t digits = 0) const { return re.to_string(digits) + (im.sign() < 0 ? " - " : " + ") + abs(im).to_string(digits) + "i"; }
};

// exp, log, trig on complex arguments (principal branches).
XComplex exp(const XComplex& z);
XComplex log(const XComplex& z);
XComplex sin(const XComplex& z);
XComplex cos(const XComplex& z);
XComplex sqrt(const XComplex& z);
// atan z = (i/2) log((1-iz)/(1+iz)), principal branch.
XComplex atan(const XComplex& z);
// e^{i t} for real t.
XComplex cis(const XReal& t);

// Precision budget: bits needed so that absolute errors stay far below a
// signal of size e^{-target_magnitude_nats}. ceil(nats/ln2) + guard + 53.
long required_bits(const XReal& target_magnitude_nats, long guard_bits);

inline constexpr long kDefaultGuardBits = 64;

// 2^-e at the given context (cheap, exact).
XReal pow2(const PrecisionContext& ctx, long e);

inline XReal factorial(const PrecisionContext& ctx, unsigned long n) {
    XReal r(ctx);
    mpfr_fac_ui(r.raw(), n, MPFR_RNDN);
    return r;
}

} // namespace kgsplit
