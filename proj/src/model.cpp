#include "kgsplit/model.hpp"

#include <nlohmann/json.hpp>

namespace kgsplit {

using ordered_json = nlohmann::ordered_json;

OddPowerSeries ModelParams::g_series() const {
    OddPowerSeries g = f;
    PrecisionContext c = ctx();
    if (g.c.empty()) g.c.push_back(c.zero());
    g.c[0] += c.real(1, 3);
    return g;
}

XReal ModelParams::amplitude_scale() const {
    PrecisionContext c = ctx();
    return eps * sqrt(c.real(static_cast<double>(k))) * omega;
}

ModelParams make_model(int k, const XReal& eps, OddPowerSeries f, std::optional<XReal> mu, int n_max,
                       long bits, int family_terms) {
    if (k < 1) throw ConfigError("make_model: k must be >= 1");
    if (n_max < 1 || n_max % 2 == 0) throw ConfigError("make_model: n_max must be odd and positive");
    PrecisionContext ctx(bits);
    if (!(eps > ctx.zero())) throw ConfigError("make_model: eps must be positive");
    if (!f.c.empty() && !f.c[0].is_zero())
        throw ConfigError("make_model: f must be O(u^5); found a u^3 coefficient");

    ModelParams p;
    p.k = k;
    p.eps = eps.rounded_to(ctx);
    p.bits = bits;
    p.n_max = n_max;
    XReal kk = ctx.real(static_cast<double>(k));
    p.omega_sq_inv = kk * (kk + p.eps * p.eps);
    p.omega = ctx.real(1.0) / sqrt(p.omega_sq_inv);
    if (mu) {
        p.mu = mu->rounded_to(ctx);
        p.f = appendix_c_family(*p.mu, f, family_terms);
    } else {
        p.f = std::move(f);
    }
    return p;
}

FrequencyClass classify_frequency(const XReal& omega, const XReal& eps0) {
    PrecisionContext ctx = omega.context();
    XReal one = ctx.real(1.0);
    if (!(omega > ctx.zero())) throw ConfigError("classify_frequency: omega must be positive");
    if (!(eps0 > ctx.zero() && eps0 <= ctx.real(1, 2)))
        throw ConfigError("classify_frequency: eps0 must lie in (0, 1/2]");
    if (omega >= one) return {FrequencyClass::J_k, 0};
    // block k: 1/(k+1) <= omega < 1/k, i.e. k = ceil(1/omega) - 1
    XReal inv = one / omega;
    long k = ceil_long(inv) - 1;
    // guard against rounding at an exact boundary 1/m
    while (omega < one / ctx.real(k + 1, 1)) ++k;
    while (k >= 1 && omega >= one / ctx.real(k, 1)) --k;
    XReal kk = ctx.real(k, 1);
    XReal left_I = one / sqrt(kk * (kk + eps0 * eps0));
    if (omega >= left_I) return {FrequencyClass::I_k, static_cast<int>(k)};
    return {FrequencyClass::J_k, static_cast<int>(k)};
}

XReal lambda_n(const ModelParams& p, int n) {
    if (n == p.k || n == -p.k)
        throw ConfigError("lambda_n: mode +-k carries the unit hyperbolic rate, not lambda_n");
    PrecisionContext ctx = p.ctx();
    XReal nn = ctx.real(static_cast<long>(n) * n, 1);
    XReal num = abs(nn - p.omega_sq_inv);
    return sqrt(num / ctx.real(p.k, 1));
}

XReal mu_n(const PrecisionContext& ctx, int n) {
    if (n < 2) throw ConfigError("mu_n: requires n >= 2");
    return sqrt(ctx.real(static_cast<long>(n) * n - 1, 1));
}

std::pair<XComplex, XComplex> duffing_homoclinic(const XComplex& y) {
    PrecisionContext ctx = y.re.context();
    // cosh, sinh of complex y
    XComplex ch{cosh(y.re) * cos(y.im), sinh(y.re) * sin(y.im)};
    XComplex sh{sinh(y.re) * cos(y.im), cosh(y.re) * sin(y.im)};
    XReal two_sqrt2 = ctx.real(2.0) * ctx.sqrt2();
    if (abs(ch) < pow2(ctx, -(ctx.bits() / 2)))
        throw SingularityError("duffing_homoclinic: evaluation too close to a pole of 1/cosh");
    XComplex v = XComplex{two_sqrt2, ctx.zero()} / ch;
    XComplex dv = -(v * sh) / ch;
    return {v, dv};
}

GalerkinField::GalerkinField(const ModelParams& p) : p_(p), m_(p.mode_count()) {
    PrecisionContext ctx = p_.ctx();
    scale_ = p_.amplitude_scale();
    inv_scale3_ = ctx.real(1.0) / (scale_ * scale_ * scale_);
    g_ = p_.g_series();
    acc_.reserve(m_);
    XReal eps2 = p_.eps * p_.eps;
    for (int j = 0; j < m_; ++j) {
        int n = p_.k * (2 * j + 1);
        if (j == 0) {
            acc_.push_back(ctx.real(1.0));   // mode k: exact unit rate
        } else {
            XReal l = lambda_n(p_, n);
            acc_.push_back(-(l * l) / eps2);
        }
    }
}

void GalerkinField::eval(const std::vector<XReal>& s, std::vector<XReal>& ds) const {
    PrecisionContext ctx = p_.ctx();
    OddSeries<XReal> v(ctx, p_.k, m_);
    for (int j = 0; j < m_; ++j) v.c[j] = s[j];
    OddSeries<XReal> G = compose_odd(g_, v, scale_, p_.k * p_.n_max);
    for (int j = 0; j < m_; ++j) {
        ds[j] = s[m_ + j];
        XReal a = acc_[j] * s[j];
        a.sub_mul(G.c[j], inv_scale3_);
        ds[m_ + j] = a;
    }
}

std::vector<XReal> flatten(const PhasePoint& s) {
    std::vector<XReal> out;
    out.reserve(2 * s.v.count());
    for (const auto& x : s.v.c) out.push_back(x);
    for (const auto& x : s.w.c) out.push_back(x);
    return out;
}

PhasePoint unflatten(const PrecisionContext& ctx, int stride, int count, const std::vector<XReal>& flat) {
    PhasePoint p{OddSeries<XReal>(ctx, stride, count), OddSeries<XReal>(ctx, stride, count)};
    for (int j = 0; j < count; ++j) {
        p.v.c[j] = flat[j];
        p.w.c[j] = flat[count + j];
    }
    return p;
}

PhasePoint vector_field(const ModelParams& p, const PhasePoint& state, TruncationInfo* info) {
    PrecisionContext ctx = p.ctx();
    int m = p.mode_count();
    if (state.v.stride != p.k || state.v.count() != m)
        throw ConfigError("vector_field: state truncation does not match the model");
    GalerkinField F(p);
    std::vector<XReal> s = flatten(state), ds(2 * m, ctx.zero());
    if (info) {
        // re-evaluate the composition once with bookkeeping
        OddSeries<XReal> v = state.v;
        compose_odd(p.g_series(), v, p.amplitude_scale(), p.k * p.n_max, info);
    }
    F.eval(s, ds);
    return unflatten(ctx, p.k, m, ds);
}

XReal hamiltonian(const ModelParams& p, const PhasePoint& state) {
    PrecisionContext ctx = p.ctx();
    int m = p.mode_count();
    if (state.v.stride != p.k || state.v.count() != m)
        throw ConfigError("hamiltonian: state truncation does not match the model");
    XReal half = ctx.real(1, 2);
    XReal eps2k = p.eps * p.eps * ctx.real(p.k, 1);
    XReal H(ctx);
    for (int j = 0; j < m; ++j) {
        int n = p.k * (2 * j + 1);
        H.add_mul(half * state.w.c[j], state.w.c[j]);
        XReal q(ctx);
        if (j == 0) {
            q = -half;   // (k^2 - 1/omega^2)/(2 eps^2 k) = -1/2 exactly
        } else {
            XReal nn = ctx.real(static_cast<long>(n) * n, 1);
            q = (nn - p.omega_sq_inv) / (eps2k * 2);
        }
        H.add_mul(q * state.v.c[j], state.v.c[j]);
    }
    // quartic term: (1/pi) int v^4/12 = mean(v^4)/6
    std::vector<XReal> quartic{ctx.zero(), ctx.real(1.0)};
    XReal one = ctx.real(1.0);
    H += compose_even_mean(quartic, state.v, one) / 6;
    // F-term: 2 mean(F(scale v)) / scale^4, F the antiderivative of f
    if (!p.f.is_zero()) {
        std::vector<XReal> Fc(p.f.terms() + 1, ctx.zero());
        for (int d = 1; d <= p.f.terms(); ++d)
            Fc[d] = p.f.c[d - 1] / (2 * d + 2);   // u^{2d+1} integrates to u^{2d+2}/(2d+2)
        XReal scale = p.amplitude_scale();
        XReal s2 = scale * scale;
        H += compose_even_mean(Fc, state.v, scale) * 2 / (s2 * s2);
    }
    return H;
}

std::vector<UPoint> rescale_k_to_1(const ModelParams& p_k, const std::vector<OrbitSample>& sol_k1) {
    PrecisionContext ctx = p_k.ctx();
    XReal a = p_k.amplitude_scale();   // sqrt(k) eps omega
    std::vector<UPoint> out;
    out.reserve(sol_k1.size());
    for (const auto& smp : sol_k1) {
        UPoint up{smp.y / a, OddSeries<XReal>(ctx, p_k.k, smp.state.v.count()),
                  OddSeries<XReal>(ctx, p_k.k, smp.state.w.count())};
        for (int j = 0; j < smp.state.v.count(); ++j) {
            up.u.c[j] = a * smp.state.v.c[j];           // mode k(2j+1) of u
            up.ux.c[j] = a * a * smp.state.w.c[j];      // d/dx = a d/dy
        }
        out.push_back(std::move(up));
    }
    return out;
}

std::vector<OrbitSample> inverse_rescale(const ModelParams& p_k, const std::vector<UPoint>& traj) {
    PrecisionContext ctx = p_k.ctx();
    XReal a = p_k.amplitude_scale();
    std::vector<OrbitSample> out;
    out.reserve(traj.size());
    for (const auto& up : traj) {
        OrbitSample smp{up.x * a, PhasePoint{OddSeries<XReal>(ctx, 1, up.u.count()),
                                             OddSeries<XReal>(ctx, 1, up.ux.count())}};
        for (int j = 0; j < up.u.count(); ++j) {
            smp.state.v.c[j] = up.u.c[j] / a;
            smp.state.w.c[j] = up.ux.c[j] / (a * a);
        }
        out.push_back(std::move(smp));
    }
    return out;
}

OddPowerSeries sine_gordon_tail(const PrecisionContext& ctx, int D) {
    OddPowerSeries s;
    s.c.assign(D, ctx.zero());
    for (int m = 2; m <= D; ++m) {
        // coefficient of u^{2m+1}: (-1)^m 2^m / (2m+1)!
        XReal c = pow2(ctx, m) / factorial(ctx, 2 * m + 1);
        if (m % 2 == 1) c.negate();
        s.c[m - 1] = c;
    }
    return s;
}

OddPowerSeries appendix_c_family(const XReal& mu, const OddPowerSeries& f, int D) {
    if (D < 2) throw ConfigError("appendix_c_family: D must be >= 2");
    PrecisionContext ctx = mu.context();
    OddPowerSeries tail = sine_gordon_tail(ctx, D);
    OddPowerSeries g;
    int terms = std::max(D, f.terms());
    g.c.assign(terms, ctx.zero());
    XReal one_minus_mu = ctx.real(1.0) - mu;
    for (int d = 1; d <= terms; ++d) {
        XReal c(ctx);
        if (d - 1 < tail.terms()) c.sub_mul(one_minus_mu, tail.c[d - 1]);
        if (d - 1 < f.terms()) c.add_mul(mu, f.c[d - 1]);
        g.c[d - 1] = c;
    }
    if (f.radius) g.radius = f.radius;
    return g;
}

std::string model_to_config(const ModelParams& p) {
    ordered_json j;
    j["k"] = p.k;
    j["eps"] = p.eps.to_string();
    ordered_json fc = ordered_json::array();
    for (int d = 1; d <= p.f.terms(); ++d)
        if (!p.f.c[d - 1].is_zero()) fc.push_back({2 * d + 1, p.f.c[d - 1].to_string()});
    j["f_coeffs"] = fc;
    if (p.mu) j["mu"] = p.mu->to_string();
    j["n_max"] = p.n_max;
    j["bits"] = p.bits;
    return j.dump(2);
}

ModelParams model_from_config(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model_from_config: bad JSON: ") + e.what());
    }
    long bits = j.value("bits", 192L);
    PrecisionContext ctx(bits);
    int k = j.value("k", 1);
    XReal eps = ctx.from_string(j.value("eps", std::string("0.3")));
    OddPowerSeries f;
    if (j.contains("f_coeffs")) {
        for (const auto& pair : j["f_coeffs"]) {
            int deg = pair.at(0).get<int>();
            if (deg < 5 || deg % 2 == 0)
                throw ConfigError("model_from_config: f_coeffs degrees must be odd and >= 5");
            int d = (deg - 1) / 2;
            if (static_cast<int>(f.c.size()) < d) f.c.resize(d, ctx.zero());
            std::string val = pair.at(1).is_string() ? pair.at(1).get<std::string>()
                                                     : pair.at(1).dump();
            f.c[d - 1] = ctx.from_string(val);
        }
    }
    std::optional<XReal> mu;
    if (j.contains("mu") && !j["mu"].is_null()) {
        std::string val = j["mu"].is_string() ? j["mu"].get<std::string>() : j["mu"].dump();
        mu = ctx.from_string(val);
    }
    int n_max = j.value("n_max", 11);
    return make_model(k, eps, std::move(f), std::move(mu), n_max, bits);
}

} // namespace kgsplit
