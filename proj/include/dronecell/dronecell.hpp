#pragma once

#include "dronecell/analytic.hpp"
#include "dronecell/channel.hpp"
#include "dronecell/errors.hpp"
#include "dronecell/geometry.hpp"
#include "dronecell/metric.hpp"
#include "dronecell/montecarlo.hpp"
#include "dronecell/params.hpp"
#include "dronecell/quadrature.hpp"
#include "dronecell/rng.hpp"
#include "dronecell/sweep.hpp"
#include "dronecell/units.hpp"
#include "dronecell/uplink_power.hpp"
