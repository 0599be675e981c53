#pragma once

#include "dense.hpp"
#include "errors.hpp"
#include "lu.hpp"
#include "matrix_market.hpp"
#include "mobius.hpp"
#include "pencil.hpp"
#include "report.hpp"
#include "solvers.hpp"
#include "sparse.hpp"
#include "synth.hpp"
#include "types.hpp"
