#pragma once

#include "completion.hpp"
#include "experiments.hpp"
#include "graph.hpp"
#include "observation.hpp"
#include "perigee.hpp"
#include "rng.hpp"
#include "runner.hpp"
#include "selection.hpp"
#include "simulation.hpp"
