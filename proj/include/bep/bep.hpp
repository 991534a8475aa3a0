#pragma once

#include "bep/arcs.hpp"
#include "bep/bep_solver.hpp"
#include "bep/carleman.hpp"
#include "bep/core.hpp"
#include "bep/fourier.hpp"
#include "bep/grid.hpp"
#include "bep/hardy.hpp"
#include "bep/parallel.hpp"
#include "bep/poly_solver.hpp"
#include "bep/quadrature.hpp"
