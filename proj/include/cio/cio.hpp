#ifndef CIO_CIO_HPP
#define CIO_CIO_HPP

// Umbrella header for the conformal inverse optimization library.

#include "cio/calibration.hpp"
#include "cio/common.hpp"
#include "cio/evaluation.hpp"
#include "cio/example1.hpp"
#include "cio/experiments.hpp"
#include "cio/forward.hpp"
#include "cio/grid.hpp"
#include "cio/io.hpp"
#include "cio/kernel.hpp"
#include "cio/lp.hpp"
#include "cio/point_estimation.hpp"
#include "cio/robust.hpp"
#include "cio/types.hpp"

#endif  // CIO_CIO_HPP
