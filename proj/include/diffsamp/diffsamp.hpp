#pragma once

// Convenience header pulling in the whole library.

#include "diffsamp/common.hpp"
#include "diffsamp/distribution.hpp"
#include "diffsamp/embeddings.hpp"
#include "diffsamp/io.hpp"
#include "diffsamp/metrics.hpp"
#include "diffsamp/rng.hpp"
#include "diffsamp/sampling.hpp"
#include "diffsamp/smoothing.hpp"
#include "diffsamp/truncation.hpp"
