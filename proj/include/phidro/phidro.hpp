#pragma once

#include "phidro/bounds.hpp"
#include "phidro/divergence.hpp"
#include "phidro/error.hpp"
#include "phidro/experiments.hpp"
#include "phidro/extended_real.hpp"
#include "phidro/risk_oracle.hpp"
#include "phidro/saa.hpp"
