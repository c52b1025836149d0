#pragma once

// The inner equation  d^2/dz^2 phi - d^2/dtau^2 phi - phi + g(phi) = 0 on
// odd sine fields: formal inverse-power asymptotics, complex-contour
// propagation of the stable/unstable solutions, Stokes-constant extraction
// from their difference, the linear toy model with its closed-form splitting,
// and the Borel-sum conjecture evaluator.

#include <optional>
#include <vector>

#include "kgsplit/fourier.hpp"
#include "kgsplit/precision.hpp"

namespace kgsplit {

// Inverse-power coefficients per mode: mode 2m+1 holds c_{n,j} of z^{-j},
// j = 1..Jmax (row j=1 is the explicit -2 sqrt2 i leading term at mode 1;
// mode-1 rows j >= 3 are the psi_1 corrections).
struct FormalModeSeries {
    int n_max = 1;    // largest mode (odd)
    int Jmax = 3;
    // c[j-1][m]: order j, mode 2m+1
    std::vector<std::vector<XComplex>> c;
    // beta[j-1][m-1]: order j, mode 2m+1 for m >= 1 (modes >= 3); the
    // inverse-power coefficients of F_n = -Pi_n[g(phi)] on the series
    std::vector<std::vector<XComplex>> beta;
    // Gevrey-1 monitor for mode 3: sup_j (|c_{3,j}|/j!)^{1/j} and the ratio
    // sequence sqrt(|c_{3,j+2}| / (j(j+1) |c_{3,j}|)) (reported, not asserted)
    XReal gevrey_sup;
    std::vector<std::pair<int, XReal>> gevrey_ratio;

    int mode_count() const { return (n_max + 1) / 2; }
    XComplex coeff(int n, int j, const PrecisionContext& ctx) const;
};

// Right side of the inner system on a (phi, d/dz phi) pair:
//   (v, w) -> (w, a),  a_n = -(n^2 - 1) v_n - Pi_n[v^3/3 + f(v)].
PhasePointC inner_vector_field(const PhasePointC& phi, const OddPowerSeries& f,
                               TruncationInfo* info = nullptr);

// Order-by-order solution of the mode recursions; f is the degree >= 5 part
// of g = u^3/3 + f. Jmax >= 5 and odd.
FormalModeSeries formal_inner_series(const OddPowerSeries& f, int n_modes_max, int Jmax,
                                     const PrecisionContext& ctx);

struct InnerState {
    XComplex z;
    PhasePointC phi;   // (phi_n, d/dz phi_n) per odd mode
};

struct SeedInfo {
    InnerState state;
    XReal error_estimate;   // l1 of the last retained term
    int j_used = 0;
};

// Evaluate the truncated series and its term-wise derivative at z0.
// j_trunc < 0 requests the empirical optimal truncation (argmin of the
// last-term size over j <= mu_3 |z0|); explicit j_trunc must satisfy
// |z0| >= 2 j_trunc / mu_3.
SeedInfo seed_from_series(const FormalModeSeries& series, const XComplex& z0, int j_trunc,
                          const PrecisionContext& ctx, const XReal* error_budget = nullptr);

struct Contour {
    std::vector<XComplex> waypoints;   // straight axis-parallel segments
    XReal step_ceiling;                // optional; zero means none
};

struct InnerIntegrateOptions {
    XReal tol;            // local error per unit arclength
    int taylor_order = 0; // 0 picks the order from tol
    long fixed_steps = 0; // >0 forces a uniform grid per segment (matched runs)
    // trailing g-terms whose l1 bound |g_d| amp^{2d+1} falls below trim_floor
    // are dropped (both fields must be set; amp bounds the field's l1 norm
    // along the contour)
    XReal amp_hint;
    XReal trim_floor;
};

// Propagate the inner field along the contour with a high-order Taylor
// scheme (polynomial RHS, jet recursion); returns the state at the final
// waypoint. Off-axis segments are rejected.
InnerState integrate_inner(const OddPowerSeries& f, const Contour& contour, const InnerState& seed,
                           const InnerIntegrateOptions& opts);

struct StokesEstimate {
    XComplex c_at_r0;      // e^{2 sqrt2 r0} Pi_3[Delta phi(-i r0)]
    XComplex c_at_r0p;     // same at r0' = 1.5 r0
    XComplex c_stab;       // Richardson-style 3 c(r0') - 2 c(r0)
    XReal error_bar;       // O(1/r0) remainder scale plus numerical floor
    XReal numeric_floor;   // e^{2 sqrt2 r0} (integration + seed) error bound
    bool trusted = true;   // false when |Delta phi| sits within 10x the floor
    XReal r0, r0p, R;
    int n_max = 0;
    long bits = 0;
    std::vector<XComplex> conjecture_partial;   // partial sums of the Borel-sum series
};

// Stokes constant from the difference of the unstable branch (integrated
// from -R - i r0) and the stable branch (from +R - i r0), both seeded by the
// shared formal series; repeated at 1.5 r0 for the stabilized value.
StokesEstimate extract_stokes(const OddPowerSeries& f, const XReal& R, const XReal& r0, int n_max,
                              long bits);

// --- toy model: gamma'' + mu_3^2 gamma = sum_{l>=3} a_l z^{-l} ---

// a[i] is a_{i+3}; returns gamma_l for l = 3..L.
std::vector<XComplex> toy_gamma_series(const std::vector<XComplex>& a, int L,
                                       const PrecisionContext& ctx);

// gamma^u(-i kappa) - gamma^s(-i kappa) = -pi e^{-mu_3 kappa}
//   sum_{l>=3} i^{l-1} mu_3^{l-2}/(l-1)! a_l.
XComplex toy_splitting_closed_form(const std::vector<XComplex>& a, const XReal& kappa,
                                   const PrecisionContext& ctx);

// Independent oracle: the same difference by integrating the linear ODE
// along (-R - i kappa) -> (-i kappa) and (+R - i kappa) -> (-i kappa) with
// series-decay seeds.
XComplex toy_splitting_numeric(const std::vector<XComplex>& a, const XReal& kappa, const XReal& R,
                               const PrecisionContext& ctx, const XReal& tol);

struct ConjectureSums {
    std::vector<XComplex> partial;          // S_L over odd L
    std::vector<XReal> increment_ratio;     // |increment ratio| diagnostics
};

// Partial sums of C_in = -pi sum_{l>=3} i^{l-1} mu_3^{l-2}/(l-1)! beta_{3,l}.
// Convergence is conjectural and only reported.
ConjectureSums stokes_conjecture_sum(const FormalModeSeries& series, int L,
                                     const PrecisionContext& ctx);

} // namespace kgsplit
