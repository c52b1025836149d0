#pragma once

// The nonlinear Klein-Gordon model family in spatial-dynamics form: the
// rescaled mode system, its eigenvalue data, the Duffing limit, the
// Hamiltonian, the k -> 1 rescaling and the sine-Gordon interpolation family.

#include <optional>
#include <string>
#include <vector>

#include "kgsplit/fourier.hpp"
#include "kgsplit/precision.hpp"

namespace kgsplit {

struct ModelParams {
    int k = 1;
    XReal eps;
    XReal omega;                 // derived: 1/sqrt(k(k+eps^2))
    XReal omega_sq_inv;          // derived: k(k+eps^2), exact at working precision
    OddPowerSeries f;            // lowest degree >= 5 (effective part; mu family already applied)
    std::optional<XReal> mu;     // echo of the family parameter when used
    int n_max = 11;              // odd truncation, in stride-reduced units (modes k*(2j+1) <= k*n_max)
    long bits = 192;

    PrecisionContext ctx() const { return PrecisionContext(bits); }
    int mode_count() const { return (n_max + 1) / 2; }
    // nonlinearity g(u) = u^3/3 + f(u)
    OddPowerSeries g_series() const;
    // amplitude scale eps*sqrt(k)*omega in front of v
    XReal amplitude_scale() const;
};

// Build params with omega derived from (k, eps); validates hypothesis (A)
// for f (no u^3 term) and oddness of n_max. When mu is given, f is replaced
// by the family nonlinearity g(u; mu) built from it.
ModelParams make_model(int k, const XReal& eps, OddPowerSeries f, std::optional<XReal> mu, int n_max,
                       long bits, int family_terms = 15);

struct FrequencyClass {
    enum Tag { I_k, J_k } tag;
    int k;
};

FrequencyClass classify_frequency(const XReal& omega, const XReal& eps0);

// lambda_n = sqrt(|n^2 - 1/omega^2| / k), n != +-k
XReal lambda_n(const ModelParams& p, int n);

// mu_n = sqrt(n^2 - 1), n >= 2
XReal mu_n(const PrecisionContext& ctx, int n);

// v^h(y) = 2 sqrt2 / cosh y and its derivative; SingularityError near the
// poles y = +- i pi/2 (mod 2 pi i)
std::pair<XComplex, XComplex> duffing_homoclinic(const XComplex& y);

// Right side of the first-order system: state (v, w) -> (w, a) with
//   a_n = +v_n - G_n               n = k
//   a_n = +(lambda_n^2/eps^2)v_n - G_n   n < k
//   a_n = -(lambda_n^2/eps^2)v_n - G_n   n > k
// G = (eps^3 k^{3/2} omega^3)^{-1} Pi[g(eps sqrt(k) omega v)].
PhasePoint vector_field(const ModelParams& p, const PhasePoint& state, TruncationInfo* info = nullptr);

// Stateless helper used by integrators: flat layout [v_0..v_{m-1}, w_0..w_{m-1}].
class GalerkinField {
  public:
    explicit GalerkinField(const ModelParams& p);
    int dim() const { return 2 * m_; }
    void eval(const std::vector<XReal>& s, std::vector<XReal>& ds) const;
    const ModelParams& params() const { return p_; }
    // linear coefficient of v_j in the acceleration (j stride-reduced index)
    const XReal& accel_coeff(int j) const { return acc_[j]; }

  private:
    ModelParams p_;
    int m_;
    XReal scale_, inv_scale3_;
    std::vector<XReal> acc_;
    OddPowerSeries g_;
};

std::vector<XReal> flatten(const PhasePoint& s);
PhasePoint unflatten(const PrecisionContext& ctx, int stride, int count, const std::vector<XReal>& flat);

// Hamiltonian in the section-3.3 normalization (1/pi prefactor): single-mode
// quadratic terms read w_n^2/2 + (n^2 - 1/omega^2)/(2 eps^2 k) v_n^2, the mode
// k one being exactly -v_k^2/2.
XReal hamiltonian(const ModelParams& p, const PhasePoint& state);

// One trajectory sample of the spatial dynamics.
struct OrbitSample {
    XReal y;
    PhasePoint state;
};

struct Orbit {
    std::vector<OrbitSample> samples;
    XReal energy_drift;
    long accepted_steps = 0;
    long rejected_steps = 0;
};

// Trajectory in the original (x, u) variables, supported on modes k*(2j+1).
struct UPoint {
    XReal x;
    RealOddSeries u;    // Fourier sine coefficients of u(x, tau)
    RealOddSeries ux;   // of d/dx u
};

// Section 9.1 change of variables: a k=1 solution v(y, tau~) at eps~ = eps/sqrt(k)
// maps to u(x, tau) = sqrt(k) eps omega v(sqrt(k) eps omega x, k tau).
std::vector<UPoint> rescale_k_to_1(const ModelParams& p_k, const std::vector<OrbitSample>& sol_k1);
// Inverse map back to the k=1 rescaled variables (round-trip check).
std::vector<OrbitSample> inverse_rescale(const ModelParams& p_k, const std::vector<UPoint>& traj);

// Appendix C family: effective degree >= 5 nonlinearity of
//   g(u; mu) = -((1-mu)(sin(sqrt2 u)/sqrt2 - u + u^3/3) - mu f(u)),
// expanded through degree 2D+1. mu=0 is sine-Gordon, mu=1 the plain model.
OddPowerSeries appendix_c_family(const XReal& mu, const OddPowerSeries& f, int D);

// Taylor coefficients of sin(sqrt2 u)/sqrt2 - u + u^3/3 (degree >= 5 part):
// (-1)^m 2^m/(2m+1)! for u^{2m+1}, m >= 2.
OddPowerSeries sine_gordon_tail(const PrecisionContext& ctx, int D);

// config block (JSON text) round trip; keys k, eps, f_coeffs, mu, n_max, bits
std::string model_to_config(const ModelParams& p);
ModelParams model_from_config(const std::string& json_text);

} // namespace kgsplit
