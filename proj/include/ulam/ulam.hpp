#pragma once

#include "ulam/bounds.hpp"
#include "ulam/couplings.hpp"
#include "ulam/hammersley.hpp"
#include "ulam/montecarlo.hpp"
#include "ulam/report.hpp"
#include "ulam/rng.hpp"
#include "ulam/sampling.hpp"
#include "ulam/subsequences.hpp"
#include "ulam/types.hpp"
