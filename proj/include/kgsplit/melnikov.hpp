#pragma once

// Appendix-C machinery: the perturbation Delta, the Taylor data of
// Theta(z) = Delta(2 sqrt2 arctan z)/(1+z^2), the convergent series S(Delta)
// with C_in'(0) = i 4 sqrt2 pi S(Delta), the sine-Gordon inner breather,
// its variational solutions, and the direct Melnikov quadrature used as the
// independent oracle.

#include <vector>

#include "kgsplit/fourier.hpp"
#include "kgsplit/precision.hpp"

namespace kgsplit {

// Delta(u) = -sin(sqrt2 u)/sqrt2 + u - u^3/3 - f(u); an odd O(u^5) germ.
OddPowerSeries delta_of_f(const OddPowerSeries& f, int P, const PrecisionContext& ctx);

struct DeltaSeries {
    int P = 0;
    std::vector<XReal> d;   // d[p-1] = Delta_p (Taylor coefficient of Theta)

    XReal coeff(int p, const PrecisionContext& ctx) const {
        if (p < 1 || p > P) return ctx.zero();
        return d[p - 1];
    }
};

// Taylor coefficients of Theta(z) = Delta(2 sqrt2 arctan z)/(1+z^2) through
// degree P (composition inside the unit radius).
DeltaSeries theta_taylor(const OddPowerSeries& delta, int P, const PrecisionContext& ctx);

struct SeriesValue {
    XReal value;
    XReal tail_estimate;   // size of the last summand
};

// S(Delta) = sum_{q=0}^{Q} (-2)^q/(q!(3+q)!) A_{3+2q} with
// A_p = B_{p+2} - B_p, B_p = p(Gamma_p - Gamma_{p-2}),
// Gamma_p = (-1)^{[p/2]} Delta_p/(p+1)^2, Delta_0 = Delta_{-1} = 0.
SeriesValue s_of_delta(const DeltaSeries& ds, int Q, const PrecisionContext& ctx);

// C_in'(0) = i 4 sqrt2 pi S(Delta) for Delta = delta_of_f(f).
XComplex c_in_prime(const OddPowerSeries& f, int Q, const PrecisionContext& ctx,
                    SeriesValue* s_out = nullptr);

// phi_b^0(z,tau) = (4/sqrt2) arctan(-i sin(tau)/z), principal branch;
// requires |sin(tau)/z| bounded away from 1.
XComplex inner_breather(const XComplex& z, const XReal& tau);

// xi_n^{+-}(z,tau) = (2/mu_n^2)(chi_n^{+-} - chi_{-n}^{+-}) with chi from the
// variational closed form; solves the linearization around phi_b^0.
XComplex xi_homogeneous(int n, int sign, const XComplex& z, const XReal& tau);

struct MelnikovGrid {
    double panel_width = 0.5;   // Gauss-Legendre panel width in s
    int gl_points = 10;
    int n_tau = 64;             // trapezoid points in tau
};

struct QuadratureResult {
    XComplex value;      // C_in'(0) by the double integral at z = -i r
    XReal tail_bound;    // |s| > S_cut remainder estimate
};

// (1/(2 pi i mu_3)) int_{-S}^{S} int_0^{2pi} Delta(phi_b(z+s,tau))
//   xi_3^+(z+s,tau) dtau ds at z = -i r, with the analytic |s|^{-5} tail bound.
QuadratureResult melnikov_quadrature(const OddPowerSeries& f, const XReal& r, const XReal& S_cut,
                                     const MelnikovGrid& grid, const PrecisionContext& ctx);

// Gauss-Legendre nodes/weights on [-1, 1] at working precision.
void legendre_rule(int n, const PrecisionContext& ctx, std::vector<XReal>& nodes,
                   std::vector<XReal>& weights);

} // namespace kgsplit
