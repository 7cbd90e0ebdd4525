#pragma once

#include "acceptance.hpp"
#include "bound_probe.hpp"
#include "carleman.hpp"
#include "constant_ledger.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "fitting.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "grid_ops.hpp"
#include "multipliers.hpp"
#include "report.hpp"
#include "stability_lab.hpp"
#include "wave_solver.hpp"
