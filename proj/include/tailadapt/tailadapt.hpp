#pragma once

#include "tailadapt/adaptive.hpp"
#include "tailadapt/calibration.hpp"
#include "tailadapt/changepoint.hpp"
#include "tailadapt/divergence.hpp"
#include "tailadapt/errors.hpp"
#include "tailadapt/estimators.hpp"
#include "tailadapt/excess_divergence.hpp"
#include "tailadapt/harness.hpp"
#include "tailadapt/laws.hpp"
#include "tailadapt/numeric.hpp"
#include "tailadapt/parallel.hpp"
#include "tailadapt/quantiles.hpp"
#include "tailadapt/random.hpp"
#include "tailadapt/sample.hpp"
#include "tailadapt/tail_functionals.hpp"
