#pragma once

#include "ssar/error.hpp"
#include "ssar/rng.hpp"
#include "ssar/data.hpp"
#include "ssar/armodel.hpp"
#include "ssar/posterior.hpp"
#include "ssar/sampler.hpp"
#include "ssar/twostage.hpp"
#include "ssar/metrics.hpp"
#include "ssar/forecaster.hpp"
#include "ssar/simharness.hpp"
#include "ssar/io.hpp"

namespace ssar {
inline constexpr const char* kVersion = "0.1.0";
}
