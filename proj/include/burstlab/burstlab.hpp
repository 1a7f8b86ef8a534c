#pragma once

// Umbrella header for the burstlab toolkit.

#include "burstlab/corpus.hpp"
#include "burstlab/csv.hpp"
#include "burstlab/distribution.hpp"
#include "burstlab/error.hpp"
#include "burstlab/manifest.hpp"
#include "burstlab/metrics.hpp"
#include "burstlab/ngram_model.hpp"
#include "burstlab/parallel.hpp"
#include "burstlab/records_io.hpp"
#include "burstlab/report.hpp"
#include "burstlab/rng.hpp"
#include "burstlab/sampling.hpp"
#include "burstlab/scoring.hpp"
#include "burstlab/stats.hpp"
#include "burstlab/vocabulary.hpp"
