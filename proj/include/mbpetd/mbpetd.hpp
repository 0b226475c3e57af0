// Umbrella header.
#ifndef MBPETD_MBPETD_HPP
#define MBPETD_MBPETD_HPP

#include "mbpetd/grid.hpp"
#include "mbpetd/physics.hpp"
#include "mbpetd/operators.hpp"
#include "mbpetd/expmv.hpp"
#include "mbpetd/stepper.hpp"
#include "mbpetd/config.hpp"
#include "mbpetd/presets.hpp"
#include "mbpetd/harness.hpp"
#include "mbpetd/output.hpp"
#include "mbpetd/svg.hpp"

#endif  // MBPETD_MBPETD_HPP
