#pragma once

#include "sustain/error.hpp"
#include "sustain/expression.hpp"
#include "sustain/fd_solver.hpp"
#include "sustain/index.hpp"
#include "sustain/pavement.hpp"
#include "sustain/polynomial.hpp"
#include "sustain/rs_integral.hpp"
#include "sustain/solutions.hpp"
