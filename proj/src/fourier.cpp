#include "kgsplit/fourier.hpp"

namespace kgsplit {

template <class S>
std::vector<S> compose_full_exponential(const OddPowerSeries& ps, const OddSeries<S>& v,
                                        const S& scale, int* band_out) {
    PrecisionContext ctx = context_of(scale);
    const int bv = v.count() == 0 ? 1 : 2 * v.count() - 1;
    const int D = ps.terms();
    const int band = (2 * D + 1) * bv;   // no truncation anywhere
    std::vector<S> u1 = detail::lift(v, band, ctx);
    for (auto& x : u1) x = x * scale;
    std::vector<S> sq = detail::convolve(u1, band, 1, u1, band, 1, band, ctx);
    std::vector<S> pw = u1;
    std::vector<S> acc(2 * band + 1, S(ctx));
    XReal factor = ctx.real(1.0);
    const XReal minus_quarter = ctx.real(-1, 4);
    for (int d = 1; d <= D; ++d) {
        pw = detail::convolve(pw, band, 1, sq, band, 0, band, ctx);
        factor *= minus_quarter;
        if (!ps.c[d - 1].is_zero()) {
            XReal w = ps.c[d - 1] * factor;
            for (int i = 0; i < 2 * band + 1; ++i) acc[i] += pw[i] * w;
        }
    }
    if (band_out) *band_out = band;
    return acc;
}

template std::vector<XReal> compose_full_exponential<XReal>(const OddPowerSeries&, const OddSeries<XReal>&,
                                                            const XReal&, int*);
template std::vector<XComplex> compose_full_exponential<XComplex>(const OddPowerSeries&,
                                                                  const OddSeries<XComplex>&, const XComplex&,
                                                                  int*);

} // namespace kgsplit
