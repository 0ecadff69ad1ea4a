#pragma once

#include "stablevar/errors.hpp"
#include "stablevar/estimators.hpp"
#include "stablevar/experiments.hpp"
#include "stablevar/io.hpp"
#include "stablevar/linalg.hpp"
#include "stablevar/metrics.hpp"
#include "stablevar/moments.hpp"
#include "stablevar/rng.hpp"
#include "stablevar/var_process.hpp"
