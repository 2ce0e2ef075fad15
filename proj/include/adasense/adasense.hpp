// adasense.hpp: everything at once.
#pragma once
#include "bounds.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "oracles.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sensing.hpp"
#include "simplex.hpp"
#include "strategies.hpp"
#include "svg.hpp"
#include "verify.hpp"
