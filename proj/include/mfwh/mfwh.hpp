#pragma once

// Umbrella header for the multi-frequency WaveHoltz library.

#include "mfwh/analysis.hpp"
#include "mfwh/banded_lu.hpp"
#include "mfwh/error.hpp"
#include "mfwh/grid.hpp"
#include "mfwh/helmholtz_reference.hpp"
#include "mfwh/krylov.hpp"
#include "mfwh/mfwh_driver.hpp"
#include "mfwh/problem.hpp"
#include "mfwh/sparse.hpp"
#include "mfwh/stencil.hpp"
#include "mfwh/time_filter.hpp"
#include "mfwh/time_plan.hpp"
#include "mfwh/wave_solver.hpp"
