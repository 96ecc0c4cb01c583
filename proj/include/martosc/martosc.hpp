#pragma once

#include "martosc/bounds.hpp"
#include "martosc/common.hpp"
#include "martosc/crossings.hpp"
#include "martosc/martingale.hpp"
#include "martosc/mdl.hpp"
#include "martosc/measure.hpp"
#include "martosc/oscillator.hpp"
#include "martosc/rng.hpp"
#include "martosc/schedule.hpp"
