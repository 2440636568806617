#pragma once

#include "sdstab/quadrature.hpp"
#include "sdstab/signals.hpp"
#include "sdstab/rng.hpp"
#include "sdstab/markov.hpp"
#include "sdstab/usf.hpp"
#include "sdstab/comparison.hpp"
#include "sdstab/sdde.hpp"
#include "sdstab/models.hpp"
#include "sdstab/moments.hpp"
#include "sdstab/certify.hpp"
#include "sdstab/experiments.hpp"
