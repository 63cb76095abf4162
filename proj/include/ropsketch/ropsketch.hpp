#pragma once

#include "ropsketch/ensemble.hpp"
#include "ropsketch/error.hpp"
#include "ropsketch/philox.hpp"
#include "ropsketch/signal.hpp"
#include "ropsketch/sketch.hpp"
#include "ropsketch/spe.hpp"
