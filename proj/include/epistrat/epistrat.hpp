#pragma once

// Umbrella header for the stratified SEIR engine: model structure,
// chain-binomial simulation, augmented-data MCMC inference, forecast
// scoring, scenario perturbations, and file-format plumbing.

#include "epistrat/common.hpp"
#include "epistrat/config.hpp"
#include "epistrat/dates.hpp"
#include "epistrat/infer.hpp"
#include "epistrat/io.hpp"
#include "epistrat/metrics.hpp"
#include "epistrat/model.hpp"
#include "epistrat/rng.hpp"
#include "epistrat/scenario.hpp"
#include "epistrat/simulate.hpp"
#include "epistrat/state.hpp"
#include "epistrat/strata.hpp"
