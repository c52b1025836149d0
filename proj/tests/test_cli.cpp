// Exercises the installed CLI surface: exit codes, file outputs, schema
// fields and byte-determinism of the data outputs.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

int run(const std::string& args) {
    std::string cmd = std::string(KGSPLIT_BIN) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

nlohmann::json parse_file(const std::string& path);

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// scan CSV minus the wall-time column
std::string strip_seconds(const std::string& csv) {
    std::stringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        size_t last = line.rfind(',');
        out += line.substr(0, last) + "\n";
    }
    return out;
}

nlohmann::json parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return nlohmann::json::parse(ss.str(), nullptr, false);   // no-throw; discarded on error
}

int failures = 0;
#define EXPECT(cond, msg)                                                     \
    do {                                                                      \
        bool ok_ = false;                                                     \
        try {                                                                 \
            ok_ = (cond);                                                     \
        } catch (const std::exception& e_) {                                  \
            std::printf("THROW %s:%d  %s: %s\n", __FILE__, __LINE__, msg, e_.what()); \
        }                                                                     \
        if (!ok_) {                                                           \
            std::printf("FAIL %s:%d  %s\n", __FILE__, __LINE__, msg);         \
            ++failures;                                                       \
        }                                                                     \
    } while (0)

} // namespace

int main() {
    using nlohmann::json;
    std::setvbuf(stdout, nullptr, _IONBF, 0);

    // toy: runs, emits both values and the gap
    EXPECT(run("toy --kappa 5 --R 25 --out /tmp/kgs_cli_toy") == 0, "toy exit");
    {
        json j = parse_file("/tmp/kgs_cli_toy.toy.json");
        EXPECT(!j.is_discarded(), "toy json parses");
        EXPECT(j.contains("relative_gap"), "toy gap present");
        double gap = j.is_discarded() ? 1.0 : std::abs(std::stod(j["relative_gap"].get<std::string>()));
        EXPECT(gap < 1e-6, "toy oracle agreement");
    }

    // degenerate single-point scan: no fit, exit 0, fit fields null
    EXPECT(run("splitting-scan --eps-min 0.35 --eps-max 0.35 --eps-steps 1 --modes 5 "
               "--out /tmp/kgs_cli_scan1") == 0,
           "degenerate scan exit");
    {
        json j = parse_file("/tmp/kgs_cli_scan1.fit.json");
        EXPECT(!j.is_discarded(), "fit json parses");
        EXPECT(j["rate_B"].is_null(), "degenerate scan has null fit");
        std::string csv = slurp("/tmp/kgs_cli_scan1.csv");
        EXPECT(csv.rfind("eps,k,s_eps,rate_fit_running,prefactor_est,energy_drift,bits,n_max,seconds",
                         0) == 0,
               "csv header schema");
    }

    // determinism: identical config twice -> identical data bytes
    EXPECT(run("splitting-scan --eps-min 0.33 --eps-max 0.4 --eps-steps 2 --modes 5 "
               "--out /tmp/kgs_cli_det_a") == 0,
           "det scan a");
    EXPECT(run("splitting-scan --eps-min 0.33 --eps-max 0.4 --eps-steps 2 --modes 5 "
               "--out /tmp/kgs_cli_det_b") == 0,
           "det scan b");
    EXPECT(strip_seconds(slurp("/tmp/kgs_cli_det_a.csv")) ==
               strip_seconds(slurp("/tmp/kgs_cli_det_b.csv")),
           "csv deterministic");
    EXPECT(slurp("/tmp/kgs_cli_det_a.gnuplot.dat") == slurp("/tmp/kgs_cli_det_b.gnuplot.dat"),
           "gnuplot deterministic");
    {
        json ma = parse_file("/tmp/kgs_cli_det_a.manifest.json");
        json mb = parse_file("/tmp/kgs_cli_det_b.manifest.json");
        EXPECT(ma["run_id"] == mb["run_id"], "run_id deterministic");
        EXPECT(ma["config"] == mb["config"], "config echo identical");
        // manifest completeness: every listed output exists
        for (const auto& f : ma["outputs"]) {
            std::ifstream probe(f.get<std::string>());
            EXPECT(probe.good(), "manifest lists existing outputs");
        }
    }

    // config file values apply where flags are absent; flags override
    {
        std::ofstream cf("/tmp/kgs_cli_cfg.json");
        cf << "{\"eps_min\": \"0.35\", \"eps_max\": \"0.35\", \"eps_steps\": 1, \"n_max\": 5}\n";
    }
    EXPECT(run("splitting-scan --config /tmp/kgs_cli_cfg.json --out /tmp/kgs_cli_cfgrun") == 0,
           "config-driven scan");
    {
        std::string csv = slurp("/tmp/kgs_cli_cfgrun.csv");
        EXPECT(csv.find("\n") != std::string::npos && csv.find(",5,") != std::string::npos,
               "config n_max applied");
        size_t rows = 0;
        for (char c : csv)
            if (c == '\n') ++rows;
        EXPECT(rows == 2, "config eps_steps applied (header + one sample)");
    }

    // jobs parallelism does not change the data bytes
    EXPECT(run("splitting-scan --eps-min 0.33 --eps-max 0.4 --eps-steps 2 --modes 5 --jobs 2 "
               "--out /tmp/kgs_cli_det_c") == 0,
           "det scan c");
    EXPECT(strip_seconds(slurp("/tmp/kgs_cli_det_a.csv")) ==
               strip_seconds(slurp("/tmp/kgs_cli_det_c.csv")),
           "csv deterministic across --jobs");

    // config errors exit with 2
    EXPECT(run("splitting-scan --eps-steps 0 --out /tmp/kgs_cli_bad") == 2, "bad steps exit 2");
    EXPECT(run("splitting-scan --bits 12 --out /tmp/kgs_cli_bad2") == 2, "bad bits exit 2");
    EXPECT(run("stokes-inner --r0 6 --R 7 --modes 5 --out /tmp/kgs_cli_bad3") == 2,
           "R < r0+3 exit 2");

    // budget errors exit with 3
    EXPECT(run("stokes-inner --r0 12 --R 20 --modes 5 --bits 80 --out /tmp/kgs_cli_budget") == 3,
           "budget exit 3");

    // stokes-inner at small radii emits the JSON schema fields
    EXPECT(run("stokes-inner --r0 6 --R 10 --modes 5 --out /tmp/kgs_cli_stokes") == 0,
           "stokes exit");
    {
        json j = parse_file("/tmp/kgs_cli_stokes.stokes.json");
        EXPECT(!j.is_discarded(), "stokes json parses");
        for (const char* key : {"C_in_re", "C_in_im", "r0", "R", "n_max", "bits", "error_bar",
                                "partial_sums"})
            EXPECT(j.contains(key), "stokes json field");
    }

    // melnikov agreement field
    EXPECT(run("melnikov --q 10 --s-cut 25 --n-tau 48 --out /tmp/kgs_cli_mel") == 0, "melnikov exit");
    {
        json j = parse_file("/tmp/kgs_cli_mel.melnikov.json");
        EXPECT(!j.is_discarded(), "melnikov json parses");
        EXPECT(j.contains("agreement_rel"), "melnikov agreement present");
        double rel = j.is_discarded() ? 1.0 : std::abs(std::stod(j["agreement_rel"].get<std::string>()));
        EXPECT(rel < 1e-3, "melnikov agreement at reduced settings");
    }

    // homoclinic profile
    EXPECT(run("homoclinic --eps 0.4 --modes 5 --out /tmp/kgs_cli_homo") == 0, "homoclinic exit");
    {
        std::string csv = slurp("/tmp/kgs_cli_homo.profile.csv");
        EXPECT(csv.rfind("eps,y,v_h,v1", 0) == 0, "homoclinic csv header");
        json j = parse_file("/tmp/kgs_cli_homo.outer.json");
        EXPECT(!j.is_discarded(), "outer json parses");
        EXPECT(j.contains("outer_ratio_report"), "outer ratio report present");
    }

    if (failures == 0) std::printf("cli tests passed\n");
    return failures == 0 ? 0 : 1;
}
