#pragma once

#include "forestinv/geodata/ascii_grid.hpp"
#include "forestinv/geodata/envi.hpp"
#include "forestinv/geodata/grid.hpp"
#include "forestinv/geodata/ground_truth.hpp"
#include "forestinv/geodata/hypercube.hpp"
#include "forestinv/geodata/point_cloud.hpp"
#include "forestinv/geodata/terrain.hpp"
