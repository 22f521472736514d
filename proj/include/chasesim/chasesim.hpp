#pragma once

#include "chasesim/bounds.hpp"
#include "chasesim/couplings.hpp"
#include "chasesim/error.hpp"
#include "chasesim/graph.hpp"
#include "chasesim/harness.hpp"
#include "chasesim/per_clock.hpp"
#include "chasesim/process.hpp"
#include "chasesim/random.hpp"
#include "chasesim/reductions.hpp"
#include "chasesim/stats.hpp"
#include "chasesim/tree_passage.hpp"
