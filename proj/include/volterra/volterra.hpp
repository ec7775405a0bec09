#pragma once

#include "volterra/convolution.hpp"
#include "volterra/csv.hpp"
#include "volterra/kernel.hpp"
#include "volterra/regularity.hpp"
#include "volterra/resolvent.hpp"
#include "volterra/spectral_operator.hpp"
#include "volterra/studies.hpp"
#include "volterra/time_grid.hpp"
#include "volterra/wiener.hpp"
