#include <cstdio>
#include <cstring>

#include "fairgp/verify.hpp"

int main(int argc, char** argv) {
    fairgp::verify::AcceptanceOptions opts;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) opts.quick = true;
    }
    const auto results = fairgp::verify::run_acceptance(opts);
    const bool ok = fairgp::verify::all_passed(results);
    std::printf("%s\n", ok ? "ACCEPTANCE: all criteria passed"
                           : "ACCEPTANCE: criteria failed (see lines above)");
    return ok ? 0 : 1;
}
