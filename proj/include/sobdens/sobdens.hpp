#pragma once

#include "approximant.hpp"
#include "boundary.hpp"
#include "boundary_layer.hpp"
#include "capacity.hpp"
#include "conformal_map.hpp"
#include "dyadic.hpp"
#include "errors.hpp"
#include "fields.hpp"
#include "hyperbolic.hpp"
#include "partition.hpp"
#include "pullback_grid.hpp"
#include "quadrature.hpp"
#include "report.hpp"
#include "svg.hpp"
