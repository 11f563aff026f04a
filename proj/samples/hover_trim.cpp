// Hover trim of the default vehicle and the collective needed per rotor.
#include <cstdio>

#include "vpquad/vpquad.hpp"

int main() {
    const vpquad::RotorModel rotor;
    const vpquad::VehicleParams veh;
    const double ct = vpquad::hover_ct(rotor, veh);
    const vpquad::RotorCommand cmd = vpquad::rotor_command(ct, rotor);
    const auto loads = vpquad::dimensionalize(cmd.thrust_coeff, cmd.torque_coeff, rotor);
    std::printf("sigma %.6f  K %.3f N\n", rotor.solidity(), rotor.dimensional_gain());
    std::printf("C_T %.6f  lambda %.6f  C_Q %.4e\n", cmd.thrust_coeff, cmd.inflow, cmd.torque_coeff);
    std::printf("theta0 %.4f rad  T_i %.4f N  Q_i %.4f N m\n", cmd.collective, loads.thrust, loads.torque);
    // Inverted hover uses the mirrored collective.
    std::printf("inverted theta0 %.4f rad\n", vpquad::collective_from_ct(-ct, rotor));
}
