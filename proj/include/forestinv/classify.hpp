#pragma once

#include "forestinv/classify/centroid.hpp"
#include "forestinv/classify/image.hpp"
#include "forestinv/classify/model_io.hpp"
#include "forestinv/classify/samples.hpp"
#include "forestinv/classify/smo.hpp"
#include "forestinv/classify/svm.hpp"
