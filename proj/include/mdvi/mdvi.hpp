#pragma once

#include "mdvi/certify.hpp"
#include "mdvi/geometry.hpp"
#include "mdvi/problems.hpp"
#include "mdvi/rng.hpp"
#include "mdvi/solver.hpp"
#include "mdvi/solver_types.hpp"
#include "mdvi/step_rules.hpp"
