#pragma once

#include "forestinv/evaluate/metrics.hpp"
#include "forestinv/evaluate/plots.hpp"
#include "forestinv/evaluate/reference.hpp"
