#pragma once

// Umbrella header for the whole pipeline: label taxonomy, softmax-sum
// fusion, temporal smoothing, coarse-to-fine routing, evaluation metrics,
// file formats, and the synthetic corpus generator.

#include "cfcsp/cascade.hpp"
#include "cfcsp/dataio.hpp"
#include "cfcsp/error.hpp"
#include "cfcsp/fusion.hpp"
#include "cfcsp/metrics.hpp"
#include "cfcsp/prng.hpp"
#include "cfcsp/smoothing.hpp"
#include "cfcsp/synthgen.hpp"
#include "cfcsp/taxonomy.hpp"
