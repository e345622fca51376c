#pragma once

#include "forestinv/allometry/enrich.hpp"
#include "forestinv/allometry/models.hpp"
