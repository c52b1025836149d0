#pragma once

// Persistence for scans and single-shot results: the CSV schema, gnuplot
// two-column emission, JSON result blocks and the run manifest. Numeric
// fields are decimal strings at full precision; JSON keys keep insertion
// order so identical configs produce identical bytes (timing fields aside).

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgsplit/inner.hpp"
#include "kgsplit/manifold.hpp"
#include "kgsplit/melnikov.hpp"

namespace kgsplit {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "kgsplit 0.1.0";

// FNV-1a 64-bit over the canonical (ordered, compact) config dump.
std::string config_hash(const ordered_json& config);

struct RunManifest {
    std::string run_id;
    ordered_json config;
    std::string tool_version = kToolVersion;
    std::string started, finished;   // ISO-8601 UTC
    std::vector<std::string> outputs;
    std::string status = "ok";

    ordered_json to_json() const;
};

std::string iso8601_now();

// CSV per the scan schema:
// eps,k,s_eps,rate_fit_running,prefactor_est,energy_drift,bits,n_max,seconds
std::string scan_csv(const ScanResult& scan, int k);

// gnuplot-ready two columns: 1/eps, log s + log eps
std::string scan_gnuplot(const ScanResult& scan);

ordered_json scan_fit_json(const ScanResult& scan, int k);
ordered_json stokes_json(const StokesEstimate& est);
ordered_json sample_json(const SplittingSample& s);

// write text to path, register in the manifest
void write_output(RunManifest& man, const std::string& path, const std::string& text);

} // namespace kgsplit
