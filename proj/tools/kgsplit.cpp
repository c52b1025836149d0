// Command-line front end: scans, Stokes-constant extraction, the Appendix-C
// pipeline, the toy oracle pair, homoclinic profiles and the verification
// battery. Outputs are CSV/JSON with decimal-string numerics; every run
// writes a manifest whose run_id is the hash of the canonical config.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "kgsplit/acceptance.hpp"
#include "kgsplit/scanio.hpp"

using namespace kgsplit;

namespace {

constexpr int kExitOk = 0, kExitConfig = 2, kExitBudget = 3, kExitAcceptance = 4;

struct CommonOpts {
    std::string config_file;
    std::string out = "kgsplit_run";
    int k = 1;
    int modes = 11;
    std::string bits = "auto";
    std::string f_coeffs;   // JSON array [[degree, "coeff"], ...]
    std::string mu;
};

OddPowerSeries parse_f(const std::string& text, const PrecisionContext& ctx) {
    OddPowerSeries f;
    if (text.empty()) return f;
    ordered_json arr = ordered_json::parse(text);
    for (const auto& pair : arr) {
        int deg = pair.at(0).get<int>();
        if (deg < 5 || deg % 2 == 0)
            throw ConfigError("f_coeffs degrees must be odd and >= 5");
        int d = (deg - 1) / 2;
        if (static_cast<int>(f.c.size()) < d) f.c.resize(d, ctx.zero());
        std::string val = pair.at(1).is_string() ? pair.at(1).get<std::string>() : pair.at(1).dump();
        f.c[d - 1] = ctx.from_string(val);
    }
    return f;
}

template <class T>
void apply_config(const CLI::Option* opt, const ordered_json& cfg, const char* key, T& var) {
    if (opt && opt->count() > 0) return;   // explicit flag wins
    if (!cfg.contains(key)) return;
    const auto& v = cfg.at(key);
    if constexpr (std::is_same_v<T, std::string>) {
        var = v.is_string() ? v.get<std::string>() : v.dump();
    } else {
        var = v.get<T>();
    }
}

ordered_json load_config(const std::string& path) {
    if (path.empty()) return ordered_json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    try {
        return ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
}

long resolve_bits(const std::string& bits, int k, const XReal& eps_min) {
    if (bits == "auto") return auto_bits(k, eps_min);
    try {
        long b = std::stol(bits);
        if (b < 53) throw ConfigError("bits must be >= 53");
        return b;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError("bits must be an integer or 'auto'");
    }
}

void finish_manifest(RunManifest& man, const std::string& out_prefix) {
    man.finished = iso8601_now();
    std::string path = out_prefix + ".manifest.json";
    std::ofstream f(path, std::ios::binary);
    man.outputs.push_back(path);
    f << man.to_json().dump(2) << "\n";
}

int cmd_splitting_scan(const CommonOpts& common, const std::string& eps_min,
                       const std::string& eps_max, int eps_steps, int order, int jobs) {
    PrecisionContext parse_ctx(256);
    ordered_json cfg = load_config(common.config_file);
    cfg["command"] = "splitting-scan";
    cfg["k"] = common.k;
    cfg["eps_min"] = eps_min;
    cfg["eps_max"] = eps_max;
    cfg["eps_steps"] = eps_steps;
    cfg["modes"] = common.modes;
    cfg["bits"] = common.bits;
    cfg["order"] = order;
    if (!common.f_coeffs.empty()) cfg["f_coeffs"] = ordered_json::parse(common.f_coeffs);
    if (!common.mu.empty()) cfg["mu"] = common.mu;

    RunManifest man;
    man.config = cfg;
    man.run_id = config_hash(cfg);
    man.started = iso8601_now();

    XReal lo = parse_ctx.from_string(eps_min);
    XReal hi = parse_ctx.from_string(eps_max);
    if (eps_steps < 1) throw ConfigError("eps-steps must be >= 1");
    std::vector<XReal> grid;
    if (eps_steps == 1) {
        grid.push_back(hi);
    } else {
        // scan from eps_max down to eps_min on a uniform grid
        XReal step = (hi - lo) / (eps_steps - 1);
        for (int i = 0; i < eps_steps; ++i) grid.push_back(hi - step * i);
    }

    ScanSpec spec;
    spec.k = common.k;
    spec.n_max = common.modes;
    spec.order_P = order;
    spec.f_raw = parse_f(common.f_coeffs, parse_ctx);
    if (!common.mu.empty()) spec.mu = parse_ctx.from_string(common.mu);
    spec.bits = (common.bits == "auto") ? 0 : resolve_bits(common.bits, common.k, lo);

    ScanResult scan = scan_and_fit(spec, grid, std::max(1, jobs));

    write_output(man, common.out + ".csv", scan_csv(scan, common.k));
    write_output(man, common.out + ".gnuplot.dat", scan_gnuplot(scan));
    write_output(man, common.out + ".fit.json", scan_fit_json(scan, common.k).dump(2) + "\n");
    finish_manifest(man, common.out);
    std::printf("splitting-scan: %zu samples", scan.samples.size());
    if (scan.samples.size() >= 2)
        std::printf(", fitted B = %s", scan.rate_B.to_string(10).c_str());
    std::printf(" -> %s.csv\n", common.out.c_str());
    return kExitOk;
}

int cmd_stokes_inner(const CommonOpts& common, const std::string& r0_s, const std::string& R_s) {
    PrecisionContext parse_ctx(256);
    ordered_json cfg = load_config(common.config_file);
    cfg["command"] = "stokes-inner";
    cfg["r0"] = r0_s;
    cfg["R"] = R_s;
    cfg["modes"] = common.modes;
    cfg["bits"] = common.bits;
    if (!common.f_coeffs.empty()) cfg["f_coeffs"] = ordered_json::parse(common.f_coeffs);
    if (!common.mu.empty()) cfg["mu"] = common.mu;

    RunManifest man;
    man.config = cfg;
    man.run_id = config_hash(cfg);
    man.started = iso8601_now();

    XReal r0 = parse_ctx.from_string(r0_s);
    XReal R = parse_ctx.from_string(R_s);
    long bits;
    if (common.bits == "auto") {
        bits = required_bits(mu_n(parse_ctx, 3) * r0, kDefaultGuardBits);
    } else {
        bits = resolve_bits(common.bits, common.k, r0);
    }
    PrecisionContext ctx(bits);
    OddPowerSeries f = parse_f(common.f_coeffs, ctx);
    if (!common.mu.empty()) f = appendix_c_family(ctx.from_string(common.mu), f, 15);

    StokesEstimate est = extract_stokes(f, R.rounded_to(ctx), r0.rounded_to(ctx), common.modes, bits);
    ordered_json j = stokes_json(est);
    write_output(man, common.out + ".stokes.json", j.dump(2) + "\n");
    finish_manifest(man, common.out);
    std::printf("stokes-inner: C_in ~ %s + %s i (error bar %s)%s\n",
                est.c_stab.re.to_string(8).c_str(), est.c_stab.im.to_string(8).c_str(),
                est.error_bar.to_string(4).c_str(), est.trusted ? "" : " [untrusted]");
    return kExitOk;
}

int cmd_melnikov(const CommonOpts& common, int Q, const std::string& r_s, const std::string& scut_s,
                 int n_tau) {
    ordered_json cfg = load_config(common.config_file);
    cfg["command"] = "melnikov";
    cfg["Q"] = Q;
    cfg["r"] = r_s;
    cfg["S_cut"] = scut_s;
    cfg["n_tau"] = n_tau;
    if (!common.f_coeffs.empty()) cfg["f_coeffs"] = ordered_json::parse(common.f_coeffs);

    RunManifest man;
    man.config = cfg;
    man.run_id = config_hash(cfg);
    man.started = iso8601_now();

    PrecisionContext ctx(256);
    OddPowerSeries f = parse_f(common.f_coeffs, ctx);
    SeriesValue S;
    XComplex series_val = c_in_prime(f, Q, ctx, &S);
    MelnikovGrid grid;
    grid.n_tau = n_tau;
    QuadratureResult quad =
        melnikov_quadrature(f, ctx.from_string(r_s), ctx.from_string(scut_s), grid, ctx);
    XReal rel = abs(quad.value - series_val) / abs(series_val);

    ordered_json j;
    j["S_delta"] = S.value.to_string();
    j["S_tail_estimate"] = S.tail_estimate.to_string();
    j["C_in_prime_re"] = series_val.re.to_string();
    j["C_in_prime_im"] = series_val.im.to_string();
    j["quadrature_re"] = quad.value.re.to_string();
    j["quadrature_im"] = quad.value.im.to_string();
    j["quadrature_tail_bound"] = quad.tail_bound.to_string();
    j["agreement_rel"] = rel.to_string();
    j["P"] = 5 + 2 * Q;
    j["Q"] = Q;
    j["r"] = r_s;
    j["grid"] = {{"panel_width", grid.panel_width}, {"gl_points", grid.gl_points}, {"n_tau", n_tau}};
    write_output(man, common.out + ".melnikov.json", j.dump(2) + "\n");
    finish_manifest(man, common.out);
    std::printf("melnikov: C_in'(0) = %s i, quadrature agreement %s\n",
                series_val.im.to_string(10).c_str(), rel.to_string(4).c_str());
    return kExitOk;
}

int cmd_toy(const CommonOpts& common, const std::string& a_json, const std::string& kappa_s,
            const std::string& R_s) {
    ordered_json cfg = load_config(common.config_file);
    cfg["command"] = "toy";
    cfg["a"] = a_json;
    cfg["kappa"] = kappa_s;
    cfg["R"] = R_s;

    RunManifest man;
    man.config = cfg;
    man.run_id = config_hash(cfg);
    man.started = iso8601_now();

    PrecisionContext ctx(256);
    std::vector<XComplex> a;
    ordered_json arr = ordered_json::parse(a_json);
    for (const auto& pair : arr) {
        int l = pair.at(0).get<int>();
        if (l < 3) throw ConfigError("toy coefficients start at a_3");
        if (static_cast<int>(a.size()) < l - 2) a.resize(l - 2, XComplex(ctx));
        std::string val = pair.at(1).is_string() ? pair.at(1).get<std::string>() : pair.at(1).dump();
        a[l - 3] = XComplex{ctx.from_string(val), ctx.zero()};
    }
    XReal kappa = ctx.from_string(kappa_s);
    XComplex closed = toy_splitting_closed_form(a, kappa, ctx);
    XComplex numeric =
        toy_splitting_numeric(a, kappa, ctx.from_string(R_s), ctx, ctx.from_string("1e-20"));
    XReal gap = abs(numeric - closed) / abs(closed);

    ordered_json j;
    j["closed_form_re"] = closed.re.to_string();
    j["closed_form_im"] = closed.im.to_string();
    j["numeric_re"] = numeric.re.to_string();
    j["numeric_im"] = numeric.im.to_string();
    j["relative_gap"] = gap.to_string();
    j["kappa"] = kappa_s;
    j["R"] = R_s;
    write_output(man, common.out + ".toy.json", j.dump(2) + "\n");
    finish_manifest(man, common.out);
    std::printf("toy: closed vs numeric relative gap %s\n", gap.to_string(4).c_str());
    return kExitOk;
}

int cmd_homoclinic(const CommonOpts& common, const std::string& eps_list, int order) {
    ordered_json cfg = load_config(common.config_file);
    cfg["command"] = "homoclinic";
    cfg["eps"] = eps_list;
    cfg["modes"] = common.modes;
    cfg["order"] = order;

    RunManifest man;
    man.config = cfg;
    man.run_id = config_hash(cfg);
    man.started = iso8601_now();

    ordered_json report = ordered_json::array();
    std::string csv = "eps,y,v_h,";
    bool header_done = false;

    std::string rest = eps_list;
    std::vector<std::string> eps_items;
    size_t pos;
    while ((pos = rest.find(',')) != std::string::npos) {
        eps_items.push_back(rest.substr(0, pos));
        rest = rest.substr(pos + 1);
    }
    if (!rest.empty()) eps_items.push_back(rest);

    for (const std::string& es : eps_items) {
        long bits = auto_bits(1, PrecisionContext(128).from_string(es));
        PrecisionContext ctx(bits);
        ModelParams p = make_model(1, ctx.from_string(es), OddPowerSeries{}, std::nullopt,
                                   common.modes, bits);
        if (!header_done) {
            for (int j = 0; j < p.mode_count(); ++j) csv += "v" + std::to_string(2 * j + 1) + ",";
            csv.back() = '\n';
            header_done = true;
        }
        XReal tol = auto_tolerance(p);
        XReal delta = ctx.real(4.0) * ctx.sqrt2();
        ManifoldExpansion ex = expand_unstable_manifold(p, order, delta);
        XReal Y = auto_seed_Y(p, order, delta);
        SectionHit hit = find_symmetric_section(p, ex.eval(ctx, -Y), -Y, ctx.real(6.0), tol);
        std::vector<XReal> grid;
        XReal lo = max(-Y + ctx.real(1, 10), hit.y_star - ctx.real(6.0));
        XReal span_g = hit.y_star - lo;
        for (int i = 0; i <= 24; ++i) grid.push_back(lo + span_g * i / 24);
        Orbit o = integrate_orbit(p, ex.eval(ctx, -Y), -Y, hit.y_star, tol, grid);
        for (auto& smp : o.samples) smp.y -= hit.y_star;
        for (const auto& smp : o.samples) {
            auto [vh, dvh] = duffing_homoclinic(XComplex{smp.y, ctx.zero()});
            csv += es + "," + smp.y.to_string(20) + "," + vh.re.to_string(20);
            for (int j = 0; j < p.mode_count(); ++j) csv += "," + smp.state.v.c[j].to_string(20);
            csv += "\n";
        }
        OuterRatioReport rep = check_outer_estimate(p, o);
        ordered_json rj;
        rj["eps"] = es;
        rj["sup_ratio"] = rep.empty ? "" : rep.sup_ratio.to_string(12);
        report.push_back(rj);
    }

    write_output(man, common.out + ".profile.csv", csv);
    ordered_json j;
    j["outer_ratio_report"] = report;
    write_output(man, common.out + ".outer.json", j.dump(2) + "\n");
    finish_manifest(man, common.out);
    std::printf("homoclinic: %zu profiles -> %s.profile.csv\n", eps_items.size(),
                common.out.c_str());
    return kExitOk;
}

int cmd_verify() {
    std::printf("criterion                          status  seconds  detail\n");
    std::printf("---------------------------------  ------  -------  ------\n");
    bool all = true;
    accept::run_all(accept::Scale::Quick, [&](const accept::CriterionResult& r) {
        all = all && r.pass;
        std::printf("%-33s  %s  %7.1f  %s\n", r.id.c_str(), r.pass ? "PASS  " : "FAIL  ", r.seconds,
                    r.detail.c_str());
        std::fflush(stdout);
    });
    return all ? kExitOk : kExitAcceptance;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"high-precision splitting toolkit for nonlinear Klein-Gordon spatial dynamics"};
    app.require_subcommand(1);

    CommonOpts common;

    auto* scan = app.add_subcommand("splitting-scan", "measure s_eps over an eps grid and fit the law");
    std::string eps_min = "0.18", eps_max = "0.40";
    int eps_steps = 6, order = 8, jobs = 1;
    auto* o_k = scan->add_option("--k", common.k, "mode family index k");
    auto* o_emin = scan->add_option("--eps-min", eps_min);
    auto* o_emax = scan->add_option("--eps-max", eps_max);
    auto* o_esteps = scan->add_option("--eps-steps", eps_steps);
    auto* o_modes = scan->add_option("--modes", common.modes, "odd truncation n_max");
    auto* o_bits = scan->add_option("--bits", common.bits, "mantissa bits or 'auto'");
    auto* o_order = scan->add_option("--order", order, "manifold expansion order P");
    auto* o_jobs = scan->add_option("--jobs", jobs, "parallel grid points");
    auto* o_f = scan->add_option("--f-coeffs", common.f_coeffs, "JSON [[degree,\"coeff\"],...]");
    auto* o_mu = scan->add_option("--mu", common.mu, "Appendix-C family parameter");
    scan->add_option("--out", common.out);
    scan->add_option("--config", common.config_file);

    auto* stokes = app.add_subcommand("stokes-inner", "extract C_in from the inner-equation splitting");
    std::string r0_s = "12", R_s = "20";
    auto* o_r0 = stokes->add_option("--r0", r0_s);
    auto* o_R = stokes->add_option("--R", R_s);
    auto* so_modes = stokes->add_option("--modes", common.modes);
    auto* so_bits = stokes->add_option("--bits", common.bits);
    auto* so_f = stokes->add_option("--f-coeffs", common.f_coeffs);
    auto* so_mu = stokes->add_option("--mu", common.mu);
    stokes->add_option("--out", common.out);
    stokes->add_option("--config", common.config_file);

    auto* mel = app.add_subcommand("melnikov", "Appendix-C series vs direct quadrature");
    int Q = 18, n_tau = 64;
    std::string r_s = "3", scut_s = "40";
    auto* mo_q = mel->add_option("--q", Q);
    auto* mo_r = mel->add_option("--r", r_s);
    auto* mo_scut = mel->add_option("--s-cut", scut_s);
    auto* mo_ntau = mel->add_option("--n-tau", n_tau);
    auto* mo_f = mel->add_option("--f-coeffs", common.f_coeffs);
    mel->add_option("--out", common.out);
    mel->add_option("--config", common.config_file);

    auto* toy = app.add_subcommand("toy", "linear toy model: closed form vs quadrature oracle");
    std::string a_json = "[[3,\"1\"]]", kappa_s = "5", toyR_s = "25";
    auto* to_a = toy->add_option("--a", a_json, "JSON [[l,\"a_l\"],...]");
    auto* to_kappa = toy->add_option("--kappa", kappa_s);
    auto* to_R = toy->add_option("--R", toyR_s);
    toy->add_option("--out", common.out);
    toy->add_option("--config", common.config_file);

    auto* homo = app.add_subcommand("homoclinic", "profiles of v^h and the computed manifold");
    std::string eps_list = "0.4,0.2";
    auto* ho_eps = homo->add_option("--eps", eps_list, "comma-separated eps values");
    auto* ho_modes = homo->add_option("--modes", common.modes);
    auto* ho_order = homo->add_option("--order", order);
    homo->add_option("--out", common.out);
    homo->add_option("--config", common.config_file);

    auto* verify = app.add_subcommand("verify", "run the verification battery at reduced scale");
    (void)verify;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        ordered_json cfg = load_config(common.config_file);
        if (scan->parsed()) {
            apply_config(o_k, cfg, "k", common.k);
            apply_config(o_emin, cfg, "eps_min", eps_min);
            apply_config(o_emax, cfg, "eps_max", eps_max);
            apply_config(o_esteps, cfg, "eps_steps", eps_steps);
            apply_config(o_modes, cfg, "n_max", common.modes);
            apply_config(o_bits, cfg, "bits", common.bits);
            apply_config(o_order, cfg, "order", order);
            apply_config(o_jobs, cfg, "jobs", jobs);
            std::string fdump;
            apply_config(o_f, cfg, "f_coeffs", fdump);
            if (!fdump.empty()) common.f_coeffs = fdump;
            apply_config(o_mu, cfg, "mu", common.mu);
            return cmd_splitting_scan(common, eps_min, eps_max, eps_steps, order, jobs);
        }
        if (stokes->parsed()) {
            apply_config(o_r0, cfg, "r0", r0_s);
            apply_config(o_R, cfg, "R", R_s);
            apply_config(so_modes, cfg, "n_max", common.modes);
            apply_config(so_bits, cfg, "bits", common.bits);
            std::string fdump;
            apply_config(so_f, cfg, "f_coeffs", fdump);
            if (!fdump.empty()) common.f_coeffs = fdump;
            apply_config(so_mu, cfg, "mu", common.mu);
            return cmd_stokes_inner(common, r0_s, R_s);
        }
        if (mel->parsed()) {
            apply_config(mo_q, cfg, "Q", Q);
            apply_config(mo_r, cfg, "r", r_s);
            apply_config(mo_scut, cfg, "S_cut", scut_s);
            apply_config(mo_ntau, cfg, "n_tau", n_tau);
            std::string fdump;
            apply_config(mo_f, cfg, "f_coeffs", fdump);
            if (!fdump.empty()) common.f_coeffs = fdump;
            return cmd_melnikov(common, Q, r_s, scut_s, n_tau);
        }
        if (toy->parsed()) {
            std::string adump;
            apply_config(to_a, cfg, "a", adump);
            if (!adump.empty()) a_json = adump;
            apply_config(to_kappa, cfg, "kappa", kappa_s);
            apply_config(to_R, cfg, "R", toyR_s);
            return cmd_toy(common, a_json, kappa_s, toyR_s);
        }
        if (homo->parsed()) {
            apply_config(ho_eps, cfg, "eps", eps_list);
            apply_config(ho_modes, cfg, "n_max", common.modes);
            apply_config(ho_order, cfg, "order", order);
            return cmd_homoclinic(common, eps_list, order);
        }
        if (verify->parsed()) return cmd_verify();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const BudgetError& e) {
        std::fprintf(stderr, "precision/budget error: %s\n", e.what());
        return kExitBudget;
    } catch (const PrecisionError& e) {
        std::fprintf(stderr, "precision error: %s\n", e.what());
        return kExitBudget;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}
