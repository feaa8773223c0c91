#pragma once

#include "splitrec/analysis.hpp"
#include "splitrec/baselines.hpp"
#include "splitrec/common.hpp"
#include "splitrec/dataset.hpp"
#include "splitrec/manifest.hpp"
#include "splitrec/metrics.hpp"
#include "splitrec/parse.hpp"
#include "splitrec/preprocess.hpp"
#include "splitrec/rng.hpp"
#include "splitrec/split.hpp"
#include "splitrec/stats.hpp"
