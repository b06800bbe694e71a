#pragma once

// Umbrella header.

#include "boltzmann.hpp"
#include "config.hpp"
#include "diagnostics.hpp"
#include "experiment.hpp"
#include "fbp.hpp"
#include "grid.hpp"
#include "heat.hpp"
#include "layer.hpp"
#include "limit.hpp"
#include "params.hpp"
#include "piecewise.hpp"
#include "presets.hpp"
#include "tridiag.hpp"
#include "warnings.hpp"
