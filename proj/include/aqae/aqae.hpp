#pragma once

// Umbrella header for the adaptive annealer eigensolver library.

#include "aqae/matrix_core.hpp"
#include "aqae/model_hamiltonians.hpp"
#include "aqae/qubo.hpp"
#include "aqae/annealer.hpp"
#include "aqae/solver.hpp"
#include "aqae/clock.hpp"
#include "aqae/observables.hpp"
