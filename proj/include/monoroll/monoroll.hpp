#pragma once

#include "monoroll/config.hpp"
#include "monoroll/csv.hpp"
#include "monoroll/drivetrain.hpp"
#include "monoroll/errors.hpp"
#include "monoroll/estimator.hpp"
#include "monoroll/filter.hpp"
#include "monoroll/harness.hpp"
#include "monoroll/kinematics.hpp"
#include "monoroll/metrics.hpp"
#include "monoroll/params.hpp"
#include "monoroll/simulator.hpp"
