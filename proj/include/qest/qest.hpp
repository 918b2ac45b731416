#pragma once

// Umbrella header for the whole library.

#include "qest/anneal.hpp"
#include "qest/fisher.hpp"
#include "qest/measurements.hpp"
#include "qest/regime_large.hpp"
#include "qest/regime_small.hpp"
#include "qest/states.hpp"
#include "qest/types.hpp"
