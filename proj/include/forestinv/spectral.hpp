#pragma once

#include "forestinv/spectral/preprocess.hpp"
#include "forestinv/spectral/separability.hpp"
