#pragma once

#include "resdist/analysis.hpp"
#include "resdist/coupling.hpp"
#include "resdist/distance_matrix.hpp"
#include "resdist/error.hpp"
#include "resdist/exact.hpp"
#include "resdist/graph.hpp"
#include "resdist/io.hpp"
#include "resdist/resistance.hpp"
#include "resdist/sampling.hpp"
