#pragma once

// Umbrella header for the variance-reduced optimization toolkit.

#include "vropt/batching.hpp"
#include "vropt/config.hpp"
#include "vropt/dataset.hpp"
#include "vropt/errors.hpp"
#include "vropt/flatten.hpp"
#include "vropt/lr.hpp"
#include "vropt/metrics.hpp"
#include "vropt/model.hpp"
#include "vropt/optim.hpp"
#include "vropt/rng.hpp"
#include "vropt/runner.hpp"
#include "vropt/schedule.hpp"
#include "vropt/train.hpp"
#include "vropt/vec.hpp"
#include "vropt/vr.hpp"
