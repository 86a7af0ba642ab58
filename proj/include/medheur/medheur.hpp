#pragma once

#include "medheur/bahadur.hpp"
#include "medheur/experiments.hpp"
#include "medheur/mmd.hpp"
#include "medheur/montecarlo.hpp"
#include "medheur/pairwise.hpp"
#include "medheur/parallel.hpp"
#include "medheur/quadrature.hpp"
#include "medheur/rng.hpp"
#include "medheur/sampling.hpp"
#include "medheur/scenario.hpp"
#include "medheur/special_functions.hpp"
#include "medheur/target_distribution.hpp"
#include "medheur/version.hpp"
