#pragma once

#include "forestinv/allometry.hpp"
#include "forestinv/chm.hpp"
#include "forestinv/classify.hpp"
#include "forestinv/crowns.hpp"
#include "forestinv/evaluate.hpp"
#include "forestinv/geodata.hpp"
#include "forestinv/spectral.hpp"
