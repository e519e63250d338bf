#pragma once

// Fuzzy ensemble feature importance: synthetic data, from-scratch learners,
// importance estimators, fuzzy fusion, and the evaluation harness.

#include "fefi/core.hpp"
#include "fefi/dataset.hpp"
#include "fefi/fi_table.hpp"
#include "fefi/fuzzy.hpp"
#include "fefi/harness.hpp"
#include "fefi/importance.hpp"
#include "fefi/inference.hpp"
#include "fefi/interaction.hpp"
#include "fefi/json_io.hpp"
#include "fefi/kinds.hpp"
#include "fefi/learners.hpp"
#include "fefi/metrics.hpp"
#include "fefi/pipeline.hpp"
#include "fefi/predictor.hpp"
#include "fefi/rulegen.hpp"
