#pragma once

// Umbrella header.
#include "hsh/errors.hpp"
#include "hsh/matrix.hpp"
#include "hsh/spectral.hpp"
#include "hsh/symnmf.hpp"
#include "hsh/pipeline.hpp"
#include "hsh/kernel_kmeans.hpp"
#include "hsh/metrics.hpp"
#include "hsh/baselines.hpp"
#include "hsh/datagen.hpp"
#include "hsh/experiment.hpp"
