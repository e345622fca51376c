#pragma once

#include "forestinv/chm/delaunay.hpp"
#include "forestinv/chm/pitfree.hpp"
