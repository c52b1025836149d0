#pragma once

// Unstable-manifold computation and splitting measurement for the truncated
// spatial dynamics: order-by-order manifold expansion, orbit propagation to
// the symmetric section Sigma = {Pi_k[dv/dy] = 0}, the splitting coordinates
// Gamma_n = lambda_n Delta_n + i eps Xi_n at y = 0, and eps-scans fitted to
// the exponential law.

#include <optional>
#include <vector>

#include "kgsplit/model.hpp"
#include "kgsplit/ode.hpp"

namespace kgsplit {

struct ManifoldExpansion {
    int P = 0;
    XReal delta;
    int stride = 1;
    int mode_count = 0;
    // coeff[p-1][j]: order-p coefficient of e^{p y} at stride-reduced mode j;
    // identically zero for even p
    std::vector<std::vector<XReal>> coeff;

    PhasePoint eval(const PrecisionContext& ctx, const XReal& y) const;
    // l1 norm of (d^2/dy^2 v - RHS) of the truncated system at y
    XReal residual_l1(const ModelParams& p, const XReal& y) const;
};

// Solve (p^2 - A_j) c_{p,j} = -G_{p,j} order by order with c_1 = delta at
// mode k. No divisor can vanish for p >= 2 (checked).
ManifoldExpansion expand_unstable_manifold(const ModelParams& p, int P, const XReal& delta);

// Propagate (vnshorter) from y0 to y1, capturing the state at the requested
// y values (the capture grid must lie inside [y0, y1] in integration order).
Orbit integrate_orbit(const ModelParams& p, const PhasePoint& start, const XReal& y0, const XReal& y1,
                      const XReal& tol, const std::vector<XReal>& capture_at = {});

struct SectionHit {
    XReal y_star;        // crossing location in the integration's y coordinate
    PhasePoint state;    // state at the crossing (mode-k velocity below tol)
    long accepted_steps = 0;
    long rejected_steps = 0;
};

// First transversal crossing of Sigma with v_k above half the Duffing apex.
SectionHit find_symmetric_section(const ModelParams& p, const PhasePoint& start, const XReal& y0,
                                  const XReal& y_limit, const XReal& tol);

struct SplittingSample {
    XReal eps;
    int k = 1;
    XReal section_y;               // y* of the crossing before re-timing
    std::vector<XComplex> Gamma;   // Gamma_{k(2j+1)}(0); Gamma[0] = 0 by the section condition
    std::vector<XComplex> Theta;   // Theta_n(0) = -Gamma_n(0) under the reversibility reduction
    XReal s_eps;                   // |Gamma_{3k}(0)| = 2 eps |w_{3k}(0)|
    XReal energy_drift;
    long bits_used = 0;
    int n_max = 0;
    XReal seed_Y, seed_delta;
    long steps = 0;
    double seconds = 0.0;
    bool trusted = true;
    std::optional<XReal> reversibility_defect;   // filled by the cross-check
    PhasePoint section_state;
};

struct MeasureOptions {
    bool cross_check = false;      // integrate the stable orbit too and compare v^s(y) = v^u(-y)
    int cross_check_points = 5;
};

// Seeds the unstable orbit at y = -Y from the order-P expansion, locates the
// section crossing, re-times it to 0 and assembles Gamma/Theta with the
// reversibility reduction Delta_n(0) = 0, Xi_n(0) = 2 w_n(0), Xi_k(0) = 0.
// Y <= 0 requests the automatic seed placement.
SplittingSample measure_splitting(const ModelParams& p, int P, const XReal& delta, const XReal& Y,
                                  const XReal& tol, const MeasureOptions& opts = {});

// Default numerical knobs derived from the model (exposed for the CLI).
XReal auto_seed_Y(const ModelParams& p, int P, const XReal& delta);
XReal auto_tolerance(const ModelParams& p);
XReal expected_splitting_scale(const ModelParams& p);   // (4 sqrt2/eps) e^{-pi sqrt(2k)/eps}
long auto_bits(int k, const XReal& eps);                // required_bits(pi sqrt(2k)/eps, 64)

struct ScanResult {
    XReal rate_B;                  // fitted B in log s + log eps = A - B/eps
    XReal intercept_A;
    std::vector<XReal> rate_running;     // fit over the first i samples (i >= 2)
    std::vector<XReal> prefactor;        // eps e^{B0/eps} s_eps/(4 sqrt2), B0 = pi sqrt(2k)
    std::vector<SplittingSample> samples;
};

// Scan template: f_raw is the user nonlinearity before any mu-family
// application (the family is rebuilt per grid point at that point's bits).
struct ScanSpec {
    int k = 1;
    OddPowerSeries f_raw;
    std::optional<XReal> mu;
    int n_max = 11;
    long bits = 0;        // 0 requests the automatic budget per grid point
    int order_P = 8;
    XReal tol;            // unset/zero requests the automatic tolerance
};

// Scan the eps grid (any order; samples keep grid order), fit the rate, and
// form per-point prefactor estimates. Aborts with PrecisionError if any
// sample comes back untrusted.
ScanResult scan_and_fit(const ScanSpec& spec, const std::vector<XReal>& eps_grid, int jobs = 1);

// Least squares for log s + log eps = A - B/eps over (eps, s) pairs;
// returns {B, A}.
std::pair<XReal, XReal> fit_splitting_law(const std::vector<std::pair<XReal, XReal>>& eps_s,
                                          const PrecisionContext& ctx);

struct OuterRatioReport {
    bool empty = true;
    XReal sup_ratio;
    std::vector<std::pair<XReal, XReal>> samples;   // (y, r(y))
};

// Theorem-3.1-style ratio r(y) = ||v(y,.) - v^h(y) sin(k tau)||_l1 / (eps~^2 v^h(y))
// over y in [-3, 0] on a section-aligned trajectory (eps~ = eps/sqrt(k)).
OuterRatioReport check_outer_estimate(const ModelParams& p, const Orbit& traj);

} // namespace kgsplit
