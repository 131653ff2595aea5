#pragma once

// Umbrella header.

#include "channels.hpp"
#include "classical.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "formation.hpp"
#include "lp.hpp"
#include "monotones.hpp"
#include "parallel.hpp"
#include "properties.hpp"
#include "protocols.hpp"
#include "quantum_core.hpp"
#include "random_states.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "state_io.hpp"
#include "structure.hpp"
