#pragma once

// Umbrella header.

#include "lorkam/types.hpp"
#include "lorkam/errors.hpp"
#include "lorkam/spacetime.hpp"
#include "lorkam/geodesic.hpp"
#include "lorkam/distance.hpp"
#include "lorkam/cutlocus.hpp"
#include "lorkam/laxoleinik.hpp"
#include "lorkam/homotopy.hpp"
#include "lorkam/io.hpp"
