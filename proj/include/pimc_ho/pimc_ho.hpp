#pragma once

#include "pimc_ho/analysis.hpp"
#include "pimc_ho/config.hpp"
#include "pimc_ho/dd.hpp"
#include "pimc_ho/energies.hpp"
#include "pimc_ho/errors.hpp"
#include "pimc_ho/grid_oracle.hpp"
#include "pimc_ho/optimize.hpp"
#include "pimc_ho/propagator.hpp"
#include "pimc_ho/series.hpp"
