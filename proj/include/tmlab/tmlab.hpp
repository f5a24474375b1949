#pragma once

// Umbrella header.

#include "tmlab/closed_sets.hpp"
#include "tmlab/corrections.hpp"
#include "tmlab/cutoffs.hpp"
#include "tmlab/deflation.hpp"
#include "tmlab/dilation.hpp"
#include "tmlab/errors.hpp"
#include "tmlab/functional.hpp"
#include "tmlab/grid.hpp"
#include "tmlab/json_io.hpp"
#include "tmlab/nonlinearity.hpp"
#include "tmlab/orlicz.hpp"
#include "tmlab/pchip.hpp"
#include "tmlab/quadrature.hpp"
#include "tmlab/sequences.hpp"
#include "tmlab/towers.hpp"
