// Full-scale verification battery: one pass/fail line per criterion.

#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "kgsplit/acceptance.hpp"

int main(int argc, char** argv) {
    using namespace kgsplit::accept;
    Scale scale = Scale::Full;
    const char* env = std::getenv("KGSPLIT_ACCEPT_SCALE");
    if ((argc > 1 && std::strcmp(argv[1], "--quick") == 0) || (env && std::strcmp(env, "quick") == 0))
        scale = Scale::Quick;

    std::printf("verification battery (%s scale)\n", scale == Scale::Full ? "full" : "quick");
    bool all = true;
    run_all(scale, [&](const CriterionResult& r) {
        all = all && r.pass;
        std::printf("%-33s  %s  %8.1fs  %s\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.seconds,
                    r.detail.c_str());
        std::fflush(stdout);
    });
    std::printf(all ? "all criteria passed\n" : "FAILURES present\n");
    return all ? 0 : 4;
}
