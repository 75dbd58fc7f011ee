#pragma once

#include "uavfog/error.hpp"
#include "uavfog/rng.hpp"
#include "uavfog/geometry.hpp"
#include "uavfog/config.hpp"
#include "uavfog/terrain.hpp"
#include "uavfog/core_model.hpp"
#include "uavfog/dynamics.hpp"
#include "uavfog/control.hpp"
#include "uavfog/comms.hpp"
#include "uavfog/cost_model.hpp"
#include "uavfog/acs.hpp"
#include "uavfog/pso.hpp"
#include "uavfog/harness.hpp"
