#pragma once

#include "strata/errors.hpp"
#include "strata/spline.hpp"
#include "strata/design_space.hpp"
#include "strata/evaluation.hpp"
#include "strata/objective.hpp"
#include "strata/trust_region.hpp"
#include "strata/stratified.hpp"
#include "strata/geometry_io.hpp"
#include "strata/config.hpp"
#include "strata/commands.hpp"
