#pragma once

// The toolkit's verification battery: seven cross-validated criteria with
// pinned tolerances, runnable at full scale (the release gate) or at a
// reduced scale for the CLI `verify` subcommand.

#include <functional>
#include <string>
#include <vector>

namespace kgsplit::accept {

struct CriterionResult {
    std::string id;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

enum class Scale { Full, Quick };

std::vector<CriterionResult> run_all(Scale scale,
                                     const std::function<void(const CriterionResult&)>& on_done = {});

CriterionResult run_toy_oracle(Scale scale);              // A1
CriterionResult run_melnikov_cross_oracle(Scale scale);   // A2
CriterionResult run_stokes_stability(Scale scale);        // A3
CriterionResult run_splitting_law(Scale scale);           // A4
CriterionResult run_perturbative_consistency(Scale scale);// A5
CriterionResult run_invariant_suite(Scale scale);         // A6
CriterionResult run_k_rescaling(Scale scale);             // A7

} // namespace kgsplit::accept
