#include "kgsplit/precision.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

namespace kgsplit {

std::string XReal::to_string(size_t digits) const {
    if (mpfr_nan_p(x_)) return "nan";
    if (mpfr_inf_p(x_)) return mpfr_sgn(x_) > 0 ? "inf" : "-inf";
    if (mpfr_zero_p(x_)) return "0";
    if (digits == 0) digits = static_cast<size_t>(std::ceil(static_cast<double>(prec()) * 0.30103)) + 3;
    mpfr_exp_t e;
    char* s = mpfr_get_str(nullptr, &e, 10, digits, x_, MPFR_RNDN);
    std::string mant(s);
    mpfr_free_str(s);
    bool neg = !mant.empty() && mant[0] == '-';
    std::string d = neg ? mant.substr(1) : mant;
    // strip trailing zeros of the mantissa, keep one digit
    size_t last = d.find_last_not_of('0');
    d = d.substr(0, last == std::string::npos ? 1 : last + 1);
    std::string out = (neg ? "-0." : "0.") + d + "e" + std::to_string(static_cast<long>(e));
    return out;
}

XComplex exp(const XComplex& z) {
    XReal m = exp(z.re);
    return {m * cos(z.im), m * sin(z.im)};
}

XComplex log(const XComplex& z) {
    XReal r = hypot(z.re, z.im);
    return {log(r), atan2(z.im, z.re)};
}

XComplex sin(const XComplex& z) {
    return {sin(z.re) * cosh(z.im), cos(z.re) * sinh(z.im)};
}

XComplex cos(const XComplex& z) {
    return {cos(z.re) * cosh(z.im), -(sin(z.re) * sinh(z.im))};
}

XComplex sqrt(const XComplex& z) {
    // principal branch via polar form
    XReal r = hypot(z.re, z.im);
    if (r.is_zero()) return XComplex(z.re.context());
    XReal sr = sqrt(r);
    XReal half = z.re.context().real(1, 2);
    XReal th = atan2(z.im, z.re) * half;
    return {sr * cos(th), sr * sin(th)};
}

XComplex atan(const XComplex& z) {
    PrecisionContext ctx = z.re.context();
    XReal one = ctx.real(1.0);
    // (1 - iz) and (1 + iz)
    XComplex a{one + z.im, -z.re};
    XComplex b{one - z.im, z.re};
    XComplex l = log(a / b);
    // (i/2) * l
    XReal half = ctx.real(1, 2);
    return {-(l.im * half), l.re * half};
}

XComplex cis(const XReal& t) { return {cos(t), sin(t)}; }

long required_bits(const XReal& target_magnitude_nats, long guard_bits) {
    if (target_magnitude_nats.sign() < 0)
        throw BudgetError("required_bits: target magnitude must be >= 0");
    if (guard_bits < 0)
        throw BudgetError("required_bits: guard_bits must be >= 0");
    long p = target_magnitude_nats.prec();
    PrecisionContext ctx(p < 64 ? 64 : p);
    XReal q = target_magnitude_nats.rounded_to(ctx) / ctx.ln2();
    return ceil_long(q) + guard_bits + 53;
}

XReal pow2(const PrecisionContext& ctx, long e) {
    XReal r(ctx);
    mpfr_set_si_2exp(r.raw(), 1, e, MPFR_RNDN);
    return r;
}

} // namespace kgsplit
