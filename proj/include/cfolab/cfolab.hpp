#pragma once

#include "cfolab/numerics.hpp"
#include "cfolab/training.hpp"
#include "cfolab/channel.hpp"
#include "cfolab/estimator.hpp"
#include "cfolab/analysis.hpp"
#include "cfolab/harness.hpp"
#include "cfolab/config_io.hpp"
