#pragma once

#include "forestinv/crowns/itc.hpp"
#include "forestinv/crowns/join.hpp"
#include "forestinv/crowns/table.hpp"
