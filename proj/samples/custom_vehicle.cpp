// Stepping the controller by hand on a heavier airframe with a yaw setpoint.
#include <cstdio>

#include "vpquad/vpquad.hpp"

int main() {
    using namespace vpquad;
    RotorModel rotor;
    VehicleParams veh;
    veh.mass = 1.6;
    ControllerConfig cfg;

    Controller ctrl(cfg, rotor, veh);
    State12 s;
    ctrl.reset(s);

    ReferencePoint ref;
    ref.pos = Vec3(0.5, 0.0, -1.0);
    ref.psi = 0.3;

    const double dt = 1e-3;
    for (int k = 0; k <= 4000; ++k) {
        const ControlOutput out = ctrl.compute(s, ref, dt);
        if (k % 500 == 0)
            std::printf("t %.1f  pos [%6.3f %6.3f %6.3f]  psi %6.3f  T %7.3f N\n", k * dt, s.pos[0], s.pos[1],
                        s.pos[2], s.psi(), out.alloc.wrench.thrust);
        s = State12::from_vector(rk4_step(s.to_vector(), out.alloc.wrench, veh, dt));
        ctrl.commit(out, dt);
    }
}
