#pragma once

#include "rotor_aero.hpp"
#include "rigid_body.hpp"
#include "allocation.hpp"
#include "ndi_controller.hpp"
#include "sim_engine.hpp"
#include "config.hpp"
#include "telemetry.hpp"
#include "acceptance.hpp"
