#pragma once

#include "pgraphon/error.hpp"
#include "pgraphon/generate.hpp"
#include "pgraphon/io.hpp"
#include "pgraphon/kernel.hpp"
#include "pgraphon/measure.hpp"
#include "pgraphon/metrics.hpp"
#include "pgraphon/overlay.hpp"
#include "pgraphon/quotients.hpp"
#include "pgraphon/rng.hpp"
#include "pgraphon/sampling.hpp"
#include "pgraphon/search.hpp"
#include "pgraphon/verify.hpp"
