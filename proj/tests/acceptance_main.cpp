// Prints one PASS/FAIL line per acceptance criterion; exit code 1 if any fail.
#include <cstdio>

#include "vpquad/acceptance.hpp"

int main() {
    const auto results = vpquad::run_acceptance();
    vpquad::print_acceptance(stdout, results);
    bool ok = true;
    for (const auto& r : results) ok = ok && r.pass;
    return ok ? 0 : 1;
}
