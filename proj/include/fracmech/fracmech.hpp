#pragma once

#include "fracmech/errors.hpp"
#include "fracmech/rational.hpp"
#include "fracmech/dense.hpp"
#include "fracmech/fracnum.hpp"
#include "fracmech/atom.hpp"
#include "fracmech/expr.hpp"
#include "fracmech/exact_linalg.hpp"
#include "fracmech/problem.hpp"
#include "fracmech/canonical.hpp"
#include "fracmech/constraints.hpp"
#include "fracmech/fracsolve.hpp"
#include "fracmech/problem_io.hpp"
#include "fracmech/report.hpp"
#include "fracmech/checks.hpp"
