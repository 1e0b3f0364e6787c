#pragma once

#include "icr/baselines.hpp"
#include "icr/coincidence.hpp"
#include "icr/config.hpp"
#include "icr/estimators.hpp"
#include "icr/harness.hpp"
#include "icr/indeterminacy.hpp"
#include "icr/model.hpp"
#include "icr/ratings_io.hpp"
#include "icr/refine.hpp"
