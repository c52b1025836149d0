#pragma once

#include <stdexcept>
#include <string>

namespace kgsplit {

// Error taxonomy shared across the toolkit. The CLI maps these to exit codes:
// 2 config, 3 precision/budget, 4 acceptance failure.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SeedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StiffnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResonanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PrecisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace kgsplit
