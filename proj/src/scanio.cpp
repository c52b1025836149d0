#include "kgsplit/scanio.hpp"

#include <chrono>
#include <cstdint>
#include <fstream>

namespace kgsplit {

std::string config_hash(const ordered_json& config) {
    std::string dump = config.dump();
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string iso8601_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

ordered_json RunManifest::to_json() const {
    ordered_json j;
    j["run_id"] = run_id;
    j["tool_version"] = tool_version;
    j["config"] = config;
    j["started"] = started;
    j["finished"] = finished;
    j["outputs"] = outputs;
    j["status"] = status;
    return j;
}

std::string scan_csv(const ScanResult& scan, int k) {
    std::string out = "eps,k,s_eps,rate_fit_running,prefactor_est,energy_drift,bits,n_max,seconds\n";
    for (size_t i = 0; i < scan.samples.size(); ++i) {
        const SplittingSample& s = scan.samples[i];
        out += s.eps.to_string() + "," + std::to_string(k) + "," + s.s_eps.to_string() + ",";
        if (i >= 1 && i - 1 < scan.rate_running.size()) out += scan.rate_running[i - 1].to_string();
        out += "," + scan.prefactor[i].to_string() + "," + s.energy_drift.to_string() + "," +
               std::to_string(s.bits_used) + "," + std::to_string(s.n_max) + "," +
               std::to_string(s.seconds) + "\n";
    }
    return out;
}

std::string scan_gnuplot(const ScanResult& scan) {
    PrecisionContext ctx(128);
    std::string out = "# 1/eps   log(s_eps) + log(eps)\n";
    for (const auto& s : scan.samples) {
        XReal x = ctx.real(1.0) / s.eps.rounded_to(ctx);
        XReal y = log(s.s_eps.rounded_to(ctx)) + log(s.eps.rounded_to(ctx));
        out += x.to_string(24) + " " + y.to_string(24) + "\n";
    }
    return out;
}

ordered_json scan_fit_json(const ScanResult& scan, int k) {
    ordered_json j;
    j["k"] = k;
    if (scan.samples.size() >= 2) {
        j["rate_B"] = scan.rate_B.to_string();
        j["intercept_A"] = scan.intercept_A.to_string();
    } else {
        j["rate_B"] = nullptr;
        j["intercept_A"] = nullptr;
    }
    ordered_json pf = ordered_json::array();
    for (const auto& p : scan.prefactor) pf.push_back(p.to_string());
    j["prefactor_est"] = pf;
    ordered_json grid = ordered_json::array();
    for (const auto& s : scan.samples) grid.push_back(s.eps.to_string());
    j["eps_grid"] = grid;
    ordered_json ss = ordered_json::array();
    for (const auto& s : scan.samples) ss.push_back(sample_json(s));
    j["samples"] = ss;
    return j;
}

ordered_json sample_json(const SplittingSample& s) {
    ordered_json j;
    j["eps"] = s.eps.to_string();
    j["k"] = s.k;
    j["s_eps"] = s.s_eps.to_string();
    j["section_y"] = s.section_y.to_string();
    j["energy_drift"] = s.energy_drift.to_string();
    j["bits"] = s.bits_used;
    j["n_max"] = s.n_max;
    j["seed_Y"] = s.seed_Y.to_string();
    j["seed_delta"] = s.seed_delta.to_string();
    j["steps"] = s.steps;
    j["trusted"] = s.trusted;
    ordered_json gam = ordered_json::array();
    for (size_t i = 0; i < s.Gamma.size(); ++i) {
        ordered_json e;
        e["mode"] = s.k * (2 * static_cast<int>(i) + 1);
        e["re"] = s.Gamma[i].re.to_string();
        e["im"] = s.Gamma[i].im.to_string();
        gam.push_back(e);
    }
    j["Gamma"] = gam;
    if (s.reversibility_defect) j["reversibility_defect"] = s.reversibility_defect->to_string();
    return j;
}

ordered_json stokes_json(const StokesEstimate& est) {
    ordered_json j;
    j["C_in_re"] = est.c_stab.re.to_string();
    j["C_in_im"] = est.c_stab.im.to_string();
    j["C_at_r0_re"] = est.c_at_r0.re.to_string();
    j["C_at_r0_im"] = est.c_at_r0.im.to_string();
    j["C_at_r0p_re"] = est.c_at_r0p.re.to_string();
    j["C_at_r0p_im"] = est.c_at_r0p.im.to_string();
    j["r0"] = est.r0.to_string();
    j["r0p"] = est.r0p.to_string();
    j["R"] = est.R.to_string();
    j["n_max"] = est.n_max;
    j["bits"] = est.bits;
    j["error_bar"] = est.error_bar.to_string();
    j["numeric_floor"] = est.numeric_floor.to_string();
    j["trusted"] = est.trusted;
    ordered_json sums = ordered_json::array();
    for (const auto& p : est.conjecture_partial) {
        ordered_json e;
        e["re"] = p.re.to_string();
        e["im"] = p.im.to_string();
        sums.push_back(e);
    }
    j["partial_sums"] = sums;
    return j;
}

void write_output(RunManifest& man, const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file " + path);
    out << text;
    man.outputs.push_back(path);
}

} // namespace kgsplit
