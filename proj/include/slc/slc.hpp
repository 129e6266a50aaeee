#pragma once

// Umbrella header: the full library in one include.

#include "slc/approximation.hpp"
#include "slc/bn.hpp"
#include "slc/distribution.hpp"
#include "slc/errors.hpp"
#include "slc/evaluator.hpp"
#include "slc/fingerprint.hpp"
#include "slc/reductions.hpp"
#include "slc/syntax.hpp"
#include "slc/term.hpp"
