#pragma once

// Umbrella header for the stopgame library.

#include "stopgame/scalar.hpp"
#include "stopgame/tree.hpp"
#include "stopgame/tree_stats.hpp"
#include "stopgame/best_response.hpp"
#include "stopgame/covering.hpp"
#include "stopgame/equilibrium_search.hpp"
#include "stopgame/heavy.hpp"
#include "stopgame/union_bounds.hpp"
#include "stopgame/accretion.hpp"
#include "stopgame/coloring.hpp"
#include "stopgame/hash.hpp"
#include "stopgame/filtration.hpp"
#include "stopgame/filtration_stats.hpp"
#include "stopgame/approximation.hpp"
#include "stopgame/dp.hpp"
#include "stopgame/schedule.hpp"
#include "stopgame/classify.hpp"
#include "stopgame/ramsey.hpp"
#include "stopgame/synthesize.hpp"
#include "stopgame/generator.hpp"
#include "stopgame/json_io.hpp"
