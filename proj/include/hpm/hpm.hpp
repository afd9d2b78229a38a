#pragma once

// Umbrella header for the whole library.

#include "hpm/adf.hpp"
#include "hpm/benchmark.hpp"
#include "hpm/correlation.hpp"
#include "hpm/csv.hpp"
#include "hpm/dataset.hpp"
#include "hpm/diagnostics.hpp"
#include "hpm/ensemble.hpp"
#include "hpm/errors.hpp"
#include "hpm/importance.hpp"
#include "hpm/knn.hpp"
#include "hpm/linreg.hpp"
#include "hpm/manifest.hpp"
#include "hpm/metrics.hpp"
#include "hpm/model_io.hpp"
#include "hpm/model_spec.hpp"
#include "hpm/parallel.hpp"
#include "hpm/quarter.hpp"
#include "hpm/rng.hpp"
#include "hpm/scenario.hpp"
#include "hpm/series.hpp"
#include "hpm/treebag.hpp"
#include "hpm/var.hpp"
