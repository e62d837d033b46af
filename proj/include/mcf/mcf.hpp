#pragma once
// Umbrella header for the multi-commodity flow solver library.

#include "mcf/errors.hpp"
#include "mcf/graph.hpp"
#include "mcf/instance.hpp"
#include "mcf/io.hpp"
#include "mcf/lp.hpp"
#include "mcf/simplex.hpp"
#include "mcf/column.hpp"
#include "mcf/pricing.hpp"
#include "mcf/master.hpp"
#include "mcf/decompose.hpp"
#include "mcf/baseline.hpp"
#include "mcf/colgen.hpp"
#include "mcf/bench.hpp"
