// Roll flip from upright hover, then inverted hover. Prints a coarse trace.
#include <cstdio>

#include "vpquad/vpquad.hpp"

int main() {
    vpquad::Scenario sc = vpquad::Scenario::flip();
    sc.duration = 3.0;
    sc.decimation = 50;
    const vpquad::RunResult r = vpquad::run_scenario(sc);
    constexpr double r2d = 180.0 / 3.14159265358979323846;
    std::printf("%7s %8s %8s %8s %8s %8s\n", "t", "y", "z", "phi", "theta0_1", "flip");
    for (const auto& f : r.log)
        std::printf("%7.3f %8.4f %8.4f %8.2f %8.2f %8d\n", f.t, f.state.pos[1], f.state.pos[2],
                    f.state.euler[0] * r2d, f.collective[0] * r2d, f.flip);
    if (r.summary.latch_time) std::printf("latched at %.3f s\n", *r.summary.latch_time);
    return r.aborted ? 1 : 0;
}
